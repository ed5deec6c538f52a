import logging
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional, Union

import joblib
import numpy as np
from pydantic import ValidationError as PydanticValidationError
from scipy.sparse import csr_matrix
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import StratifiedKFold

from bloc_lang.api.base import BlocApiBase, validate_positive_int
from bloc_lang.api.tokenizer import TermMultiset
from bloc_lang.api.vectorspace import account_terms, build_vocabulary, to_matrix, weighting_for
from bloc_lang.exceptions import DataError, ModelFormatError, ValidationError, VocabularyMismatchError
from bloc_lang.models.botdetect import (
    BOT_CLASS,
    HUMAN_CLASS,
    Confusion,
    EvalReport,
    FeatureMatrix,
    FoldReport,
    Prediction,
    TreeEnsembleModel,
)
from bloc_lang.models.language import LanguageConfig
from bloc_lang.models.timeline import Dataset, Label
from bloc_lang.models.vectors import TfIdfVector, Vocabulary
from bloc_lang.version import SCHEMA_VERSIONS

logger = logging.getLogger(__name__)

MODEL_FORMAT = "bloc-lang/tree-ensemble"

PathLike = Union[str, Path]


def _bot_human_labels(dataset: Dataset) -> dict[str, Label]:
    if not dataset.labels:
        raise ValidationError("Bot detection requires a labeled dataset")
    other = sorted(account for account, label in dataset.labels.items() if label not in (Label.BOT, Label.HUMAN))
    if other:
        raise ValidationError(f"Bot detection accepts only bot/human labels; got others for: {', '.join(other[:5])}")
    return dict(sorted(dataset.labels.items()))


def _encode_target(label: Label) -> int:
    return BOT_CLASS if label is Label.BOT else HUMAN_CLASS


def _feature_matrix(
        terms: dict[str, TermMultiset],
        account_ids: Sequence[str],
        vocab: Vocabulary,
        cfg: LanguageConfig,
        labels: Optional[Sequence[Label]] = None,
) -> FeatureMatrix:
    vectors = weighting_for(vocab).vectors([terms[account] for account in account_ids], account_ids)
    matrix = to_matrix(vectors) if vectors else csr_matrix((0, len(vocab)))
    return FeatureMatrix(
        account_ids=tuple(account_ids),
        matrix=matrix,
        vocabulary=vocab,
        labels=tuple(labels) if labels is not None else None,
        language=cfg,
    )


def extract_features(dataset: Dataset, cfg: Optional[LanguageConfig] = None) -> FeatureMatrix:
    """
    Build the bot/human feature matrix of a labeled dataset.

    Each labeled account is encoded, tokenized (bi-grams by default) and weighted
    by TF-IDF over a vocabulary fit on exactly these accounts.

    :param dataset: Dataset whose labels are all ``bot`` or ``human``
    :param cfg: Language parameters; defaults to ``LanguageConfig.bot_detection()``
    :return: FeatureMatrix with rows in sorted account order
    :raises ValidationError: If the dataset is empty or not labeled bot/human
    """
    language = cfg or LanguageConfig.bot_detection()
    if len(dataset) == 0:
        raise ValidationError("Cannot extract features from an empty dataset")
    labels = _bot_human_labels(dataset)
    account_ids = list(labels)

    for account_id in account_ids:
        if len(dataset.timelines[account_id]) == 0:
            logger.warning(f"Account {account_id} has an empty timeline; its feature row is all zero")

    terms = account_terms(dataset, language)
    vocab = build_vocabulary([terms[account] for account in account_ids])
    features = _feature_matrix(terms, account_ids, vocab, language, [labels[account] for account in account_ids])
    logger.info(f"Extracted features for {len(account_ids)} accounts over {len(vocab)} words")
    return features


def train(
        features: FeatureMatrix,
        trees: int = 100,
        seed: int = 0,
        n_jobs: Optional[int] = None,
) -> TreeEnsembleModel:
    """
    Fit a random forest on a labeled feature matrix.

    Every tree is grown on a bootstrap sample with Gini splits over ``ceil(sqrt(k))``
    random dimensions per split, down to pure leaves.

    :param features: Labeled feature matrix
    :param trees: Ensemble size
    :param seed: Random seed; equal seeds give identical models
    :param n_jobs: Parallel jobs for tree training and prediction
    :raises ValidationError: If only one class is present or there are no features
    """
    validate_positive_int("trees", trees)
    if features.labels is None:
        raise ValidationError("Training requires a labeled feature matrix")
    targets = features.targets()
    if len(set(targets)) < 2:
        raise ValidationError("Training data must contain both bot and human accounts")
    dimensions = features.matrix.shape[1]
    if dimensions == 0:
        raise ValidationError("Training data has an empty vocabulary")

    forest = RandomForestClassifier(
        n_estimators=trees,
        criterion="gini",
        max_features=max(1, math.ceil(math.sqrt(dimensions))),
        max_depth=None,
        min_samples_leaf=1,
        bootstrap=True,
        random_state=seed,
        n_jobs=n_jobs,
    )
    forest.fit(features.matrix, targets)
    logger.debug(f"Trained {trees} trees on {len(targets)} accounts, {dimensions} dimensions, seed={seed}")
    return TreeEnsembleModel(
        forest=forest,
        vocabulary=features.vocabulary,
        language=features.language,
        trees=trees,
        seed=seed,
    )


def _bot_scores(model: TreeEnsembleModel, matrix: Any) -> np.ndarray:
    # Fraction of trees voting bot; a tree votes for the class index of its leaf majority.
    classes = list(model.forest.classes_)
    bot_index = classes.index(BOT_CLASS)
    votes = np.array([estimator.predict(matrix) == bot_index for estimator in model.forest.estimators_])
    return votes.mean(axis=0)


def _label_for(score: float) -> Label:
    # Ties go to human.
    return Label.BOT if score > 0.5 else Label.HUMAN


def predict(model: TreeEnsembleModel, vector: TfIdfVector) -> Prediction:
    """
    Classify one account vector by majority vote.

    :return: Prediction with the fraction of trees voting bot as score
    :raises VocabularyMismatchError: If the vector was built over another vocabulary
    """
    if vector.vocabulary_fingerprint != model.vocabulary.fingerprint or vector.dimension != len(model.vocabulary):
        raise VocabularyMismatchError(
            f"Vector of {vector.account_id!r} has dimension {vector.dimension}; "
            f"the model expects its own vocabulary of {len(model.vocabulary)} words"
        )
    score = float(_bot_scores(model, to_matrix([vector]))[0])
    return Prediction(account_id=vector.account_id, label=_label_for(score), score=score)


def predict_dataset(model: TreeEnsembleModel, dataset: Dataset) -> list[Prediction]:
    """Classify every account of a dataset with the model's own language and vocabulary."""
    if len(dataset) == 0:
        return []
    terms = account_terms(dataset, model.language)
    account_ids = dataset.account_ids()
    features = _feature_matrix(terms, account_ids, model.vocabulary, model.language)
    scores = _bot_scores(model, features.matrix)
    return [
        Prediction(account_id=account_id, label=_label_for(float(score)), score=float(score))
        for account_id, score in zip(account_ids, scores)
    ]


def _downsample(account_ids: list[str], labels: dict[str, Label], seed: int) -> list[str]:
    bots = [account for account in account_ids if labels[account] is Label.BOT]
    humans = [account for account in account_ids if labels[account] is Label.HUMAN]
    minority, majority = (bots, humans) if len(bots) <= len(humans) else (humans, bots)
    rng = np.random.default_rng(seed)
    kept = rng.choice(len(majority), size=len(minority), replace=False)
    sampled = [majority[index] for index in sorted(kept)]
    logger.info(f"Balanced classes by keeping {len(sampled)} of {len(majority)} majority-class accounts")
    return sorted(minority + sampled)


def cross_validate(
        dataset: Dataset,
        folds: int = 5,
        cfg: Optional[LanguageConfig] = None,
        trees: int = 100,
        seed: int = 0,
        balance: bool = False,
        n_jobs: Optional[int] = None,
) -> EvalReport:
    """
    Stratified k-fold evaluation of the bot classifier.

    For every fold the vocabulary, document frequencies and forest are fit on the
    training accounts only; the test accounts are weighted against that vocabulary.
    Confusion counts are pooled over all folds (micro-average) with bot as the
    positive class.

    :param dataset: Dataset labeled bot/human
    :param folds: Number of folds, at least 2
    :param cfg: Language parameters; defaults to ``LanguageConfig.bot_detection()``
    :param trees: Ensemble size per fold
    :param seed: Seed for the split, the balancing sample and (offset by the fold index) each forest
    :param balance: Downsample the majority class before splitting
    :param n_jobs: Parallel jobs for each forest
    :raises ValidationError: If a class has fewer accounts than folds
    """
    validate_positive_int("folds", folds, minimum=2)
    language = cfg or LanguageConfig.bot_detection()
    labels = _bot_human_labels(dataset)
    account_ids = list(labels)
    if balance:
        account_ids = _downsample(account_ids, labels, seed)

    targets = np.array([_encode_target(labels[account]) for account in account_ids])
    class_sizes = {cls: int((targets == cls).sum()) for cls in (BOT_CLASS, HUMAN_CLASS)}
    if min(class_sizes.values()) < folds:
        raise ValidationError(
            f"too few samples to stratify: {class_sizes[BOT_CLASS]} bot and {class_sizes[HUMAN_CLASS]} human "
            f"accounts for {folds} folds"
        )

    # Term multisets depend on one account only, so computing them up front leaks nothing.
    terms = account_terms(dataset, language)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)

    total = Confusion()
    per_fold: list[FoldReport] = []
    for fold, (train_index, test_index) in enumerate(splitter.split(np.zeros(len(targets)), targets)):
        train_ids = [account_ids[i] for i in train_index]
        test_ids = [account_ids[i] for i in test_index]

        vocab = build_vocabulary([terms[account] for account in train_ids])
        train_features = _feature_matrix(terms, train_ids, vocab, language, [labels[a] for a in train_ids])
        model = train(train_features, trees=trees, seed=seed + fold, n_jobs=n_jobs)

        test_features = _feature_matrix(terms, test_ids, vocab, language)
        predicted = (_bot_scores(model, test_features.matrix) > 0.5).astype(int)
        tn, fp, fn, tp = confusion_matrix(targets[test_index], predicted, labels=[HUMAN_CLASS, BOT_CLASS]).ravel()
        confusion = Confusion(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))
        total = total + confusion

        per_fold.append(FoldReport(
            fold=fold,
            train_accounts=len(train_ids),
            test_accounts=len(test_ids),
            vocabulary_size=len(vocab),
            confusion=confusion,
        ))
        logger.debug(f"Fold {fold}: vocabulary={len(vocab)} precision={confusion.precision:.3f} "
                     f"recall={confusion.recall:.3f}")

    report = EvalReport(
        folds=folds,
        trees=trees,
        seed=seed,
        accounts=len(account_ids),
        precision=total.precision,
        recall=total.recall,
        f1=total.f1,
        confusion=total,
        per_fold=per_fold,
    )
    logger.info(f"Cross-validated {len(account_ids)} accounts over {folds} folds: f1={report.f1:.3f}")
    return report


def save_model(model: TreeEnsembleModel, path: PathLike) -> None:
    """
    Persist a trained model with a versioned header.

    The header records the format name and version together with the language
    parameters and vocabulary needed to vectorize new accounts.
    """
    payload = {
        "header": {
            "format": MODEL_FORMAT,
            "version": SCHEMA_VERSIONS["tree-ensemble"],
            "language": model.language.model_dump(),
            "vocabulary": model.vocabulary.model_dump(),
            "trees": model.trees,
            "seed": model.seed,
        },
        "forest": model.forest,
    }
    try:
        joblib.dump(payload, Path(path))
    except OSError as exc:
        raise DataError(f"Cannot write model file {path}: {exc}") from exc
    logger.info(f"Saved model with {model.trees} trees to {path}")


def load_model(path: PathLike) -> TreeEnsembleModel:
    """
    Load a model written by :func:`save_model`.

    :raises DataError: If the file cannot be read
    :raises ModelFormatError: If the header is missing or of an unsupported format or version
    """
    model_path = Path(path)
    try:
        payload = joblib.load(model_path)
    except OSError as exc:
        raise DataError(f"Cannot read model file {model_path}: {exc}") from exc
    except Exception as exc:
        raise ModelFormatError(f"{model_path} is not a bloc-lang model file: {exc}") from exc

    header = payload.get("header") if isinstance(payload, dict) else None
    if not isinstance(header, dict) or header.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{model_path} has no '{MODEL_FORMAT}' header")
    if header.get("version") != SCHEMA_VERSIONS["tree-ensemble"]:
        raise ModelFormatError(f"Unsupported model version {header.get('version')!r} in {model_path}")

    try:
        return TreeEnsembleModel(
            forest=payload["forest"],
            vocabulary=Vocabulary.model_validate(header["vocabulary"]),
            language=LanguageConfig.model_validate(header["language"]),
            trees=header["trees"],
            seed=header["seed"],
        )
    except (KeyError, PydanticValidationError) as exc:
        raise ModelFormatError(f"Corrupt model header in {model_path}: {exc}") from exc


class Bots(BlocApiBase):
    """
    Bot detection API: features, training, prediction and cross-validation.

    Accessed via ``client.bots``. Language parameters default to the bot detection
    preset when the run configuration sets none.
    """

    def features(self, dataset: Dataset) -> FeatureMatrix:
        return extract_features(dataset, self.language(LanguageConfig.bot_detection()))

    def train(self, dataset: Dataset) -> TreeEnsembleModel:
        classifier = self.config.classifier
        return train(self.features(dataset), trees=classifier.trees, seed=self.config.seed, n_jobs=classifier.n_jobs)

    def predict(self, model: TreeEnsembleModel, dataset: Dataset) -> list[Prediction]:
        return predict_dataset(model, dataset)

    def evaluate(self, dataset: Dataset) -> EvalReport:
        """Cross-validate with the folds, trees, balancing and seed of the run configuration."""
        classifier = self.config.classifier
        return cross_validate(
            dataset,
            folds=classifier.folds,
            cfg=self.language(LanguageConfig.bot_detection()),
            trees=classifier.trees,
            seed=self.config.seed,
            balance=classifier.balance,
            n_jobs=classifier.n_jobs,
        )

    @staticmethod
    def save(model: TreeEnsembleModel, path: PathLike) -> None:
        save_model(model, path)

    @staticmethod
    def load(path: PathLike) -> TreeEnsembleModel:
        return load_model(path)
