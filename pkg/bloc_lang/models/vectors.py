"""
Vector space models: vocabulary and sparse TF-IDF vectors.
"""

import hashlib
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from .alphabet import Word, word_key


class Vocabulary(BaseModel):
    """
    Words indexed densely in lexicographic order, with document frequencies.

    ``document_frequency[i]`` is the number of accounts containing ``words[i]``;
    ``total_documents`` is the number of accounts the vocabulary was fit on.
    """

    model_config = ConfigDict(frozen=True)

    words: tuple[Word, ...]
    document_frequency: tuple[int, ...]
    total_documents: int = Field(ge=1)

    _index: dict[Word, int] = PrivateAttr(default_factory=dict)
    _fingerprint: str = PrivateAttr(default="")

    @model_validator(mode="after")
    def _check_frequencies(self) -> "Vocabulary":
        if len(self.words) != len(self.document_frequency):
            raise ValueError("words and document_frequency must have the same length")
        keys = [word_key(word) for word in self.words]
        if keys != sorted(set(keys)):
            raise ValueError("words must be distinct and in lexicographic order")
        for word, frequency in zip(self.words, self.document_frequency):
            if not 1 <= frequency <= self.total_documents:
                raise ValueError(f"document frequency of {word_key(word)!r} must be in [1, {self.total_documents}]")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._index = {word: index for index, word in enumerate(self.words)}
        digest = hashlib.sha1(usedforsecurity=False)
        for word in self.words:
            digest.update("\x1f".join(word).encode("utf-8"))
            digest.update(b"\x1e")
        self._fingerprint = digest.hexdigest()

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, item: object) -> bool:
        return item in self._index

    @property
    def fingerprint(self) -> str:
        """Stable digest of the word list; vectors over the same vocabulary share it."""
        return self._fingerprint

    def index_of(self, word: Word) -> Optional[int]:
        return self._index.get(word)

    def frequency_of(self, word: Word) -> int:
        index = self._index.get(word)
        return 0 if index is None else self.document_frequency[index]


class TfIdfVector(BaseModel):
    """Sparse weighted word vector of one account over a vocabulary."""

    model_config = ConfigDict(frozen=True)

    account_id: str
    weights: dict[int, float] = Field(default_factory=dict)
    dimension: int = Field(ge=0)
    vocabulary_fingerprint: str = ""

    @model_validator(mode="after")
    def _check_weights(self) -> "TfIdfVector":
        for index, weight in self.weights.items():
            if not 0 <= index < self.dimension:
                raise ValueError(f"dimension {index} outside vocabulary of size {self.dimension}")
            if not weight >= 0 or weight == float("inf"):
                raise ValueError(f"weight for dimension {index} must be finite and non-negative")
        return self

    def is_zero(self) -> bool:
        return not any(self.weights.values())

    def scaled(self, factor: float) -> "TfIdfVector":
        """Return a copy with every weight multiplied by a non-negative factor."""
        return self.model_copy(update={"weights": {index: weight * factor for index, weight in self.weights.items()}})
