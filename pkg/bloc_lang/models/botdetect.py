"""
Bot detection models: feature matrices, the tree ensemble and evaluation reports.
"""

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy.sparse import csr_matrix

from .language import LanguageConfig
from .timeline import Label
from .vectors import Vocabulary

BOT_CLASS = 1
HUMAN_CLASS = 0


class FeatureMatrix(BaseModel):
    """One row per account over a bi-gram vocabulary, with bot/human labels when known."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    account_ids: tuple[str, ...]
    matrix: csr_matrix
    vocabulary: Vocabulary
    labels: Optional[tuple[Label, ...]] = None
    language: LanguageConfig = Field(default_factory=LanguageConfig.bot_detection)

    @model_validator(mode="after")
    def _check_shape(self) -> "FeatureMatrix":
        rows, columns = self.matrix.shape
        if rows != len(self.account_ids):
            raise ValueError(f"matrix has {rows} rows for {len(self.account_ids)} accounts")
        if columns != len(self.vocabulary):
            raise ValueError(f"matrix has {columns} columns for a vocabulary of {len(self.vocabulary)} words")
        if self.labels is not None and len(self.labels) != rows:
            raise ValueError("one label per row is required")
        return self

    def targets(self) -> list[int]:
        """Labels encoded as classifier targets (bot = 1, human = 0)."""
        if self.labels is None:
            raise ValueError("feature matrix has no labels")
        return [BOT_CLASS if label is Label.BOT else HUMAN_CLASS for label in self.labels]


class TreeEnsembleModel(BaseModel):
    """A trained random forest together with the language and vocabulary it was fit on."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    forest: Any
    vocabulary: Vocabulary
    language: LanguageConfig
    trees: int
    seed: int


class Prediction(BaseModel):
    account_id: str
    label: Label
    score: float = Field(ge=0.0, le=1.0)


class Confusion(BaseModel):
    """Confusion counts with the positive class first."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(tp=self.tp + other.tp, fp=self.fp + other.fp, fn=self.fn + other.fn, tn=self.tn + other.tn)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def precision(self) -> float:
        predicted = self.tp + self.fp
        return self.tp / predicted if predicted else 0.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def recall(self) -> float:
        actual = self.tp + self.fn
        return self.tp / actual if actual else 0.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


class FoldReport(BaseModel):
    fold: int
    train_accounts: int
    test_accounts: int
    vocabulary_size: int
    confusion: Confusion


class EvalReport(BaseModel):
    """Micro-averaged cross-validation metrics, bot as the positive class."""

    folds: int
    trees: int
    seed: int
    accounts: int
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)
    confusion: Confusion
    per_fold: list[FoldReport]


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall, 0 when both are 0."""
    total = precision + recall
    return 2 * precision * recall / total if total else 0.0
