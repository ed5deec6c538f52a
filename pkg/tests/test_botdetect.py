"""
Unit tests for the bot detection pipeline.
"""

from unittest.mock import patch

import joblib
import numpy as np
import pytest
from scipy.sparse import vstack

from bloc_lang.api import botdetect
from bloc_lang.api.botdetect import (
    cross_validate,
    extract_features,
    load_model,
    predict,
    predict_dataset,
    save_model,
    train,
)
from bloc_lang.api.timeline import build_dataset, slice_dataset
from bloc_lang.api.vectorspace import account_terms, build_vocabulary, tf_idf
from bloc_lang.exceptions import DataError, ModelFormatError, ValidationError, VocabularyMismatchError
from bloc_lang.models.botdetect import Confusion, FeatureMatrix
from bloc_lang.models.language import LanguageConfig, TokenizationMethod
from bloc_lang.models.timeline import Dataset, Label
from bloc_lang.v1 import Client
from tests.factories import bot_posts, human_posts

TREES = 25


def relabel(dataset: Dataset, labels: dict[str, Label]) -> Dataset:
    return Dataset(timelines=dataset.timelines, graph=dataset.graph, labels=labels)


@pytest.fixture(scope="module")
def small_dataset(separable_dataset) -> Dataset:
    accounts = [f"bot{i:03d}" for i in range(20)] + [f"hum{i:03d}" for i in range(20)]
    return slice_dataset(separable_dataset, accounts=accounts)


@pytest.fixture(scope="module")
def model(small_dataset):
    return train(extract_features(small_dataset), trees=TREES, seed=3)


class TestExtractFeatures:
    """Test cases for feature extraction."""

    def test_rows_and_labels(self, small_dataset):
        """Test one row per labeled account in sorted order."""
        features = extract_features(small_dataset)

        assert features.account_ids == tuple(small_dataset.account_ids())
        assert features.matrix.shape == (40, len(features.vocabulary))
        assert features.labels[0] is Label.BOT
        assert features.labels[-1] is Label.HUMAN

    def test_rows_are_distinct(self, separable_dataset):
        """Test no two accounts of the separable corpus share a feature row."""
        features = extract_features(separable_dataset)

        assert np.unique(features.matrix.toarray(), axis=0).shape[0] == len(features.account_ids) == 200

    def test_bigram_preset(self, small_dataset):
        """Test the default language is the bi-gram preset."""
        features = extract_features(small_dataset)

        assert features.language == LanguageConfig.bot_detection()
        assert features.language.p4.method is TokenizationMethod.NGRAM
        assert all(len(word) == 2 for word in features.vocabulary.words)

    def test_empty_dataset(self):
        """Test an empty dataset is rejected."""
        with pytest.raises(ValidationError, match="empty dataset"):
            extract_features(Dataset())

    def test_unlabeled_dataset(self):
        """Test labels are required."""
        with pytest.raises(ValidationError, match="labeled dataset"):
            extract_features(build_dataset(human_posts(0)))

    def test_other_labels(self):
        """Test coordination labels are rejected."""
        dataset = build_dataset(human_posts(0), labels={"hum000": Label.DRIVER})

        with pytest.raises(ValidationError, match="only bot/human"):
            extract_features(dataset)


class TestTrain:
    """Test cases for forest training and prediction."""

    def test_single_class(self):
        """Test training needs both classes."""
        posts = bot_posts(0) + bot_posts(1)
        dataset = build_dataset(posts, labels={"bot000": Label.BOT, "bot001": Label.BOT})

        with pytest.raises(ValidationError, match="both bot and human"):
            train(extract_features(dataset), trees=5)

    def test_invalid_trees(self, small_dataset):
        """Test the ensemble size must be positive."""
        with pytest.raises(ValidationError):
            train(extract_features(small_dataset), trees=0)

    def test_model_records_parameters(self, model):
        """Test the model keeps its size, seed and vocabulary."""
        assert model.trees == TREES
        assert model.seed == 3
        assert len(model.forest.estimators_) == TREES
        assert model.forest.max_features == int(np.ceil(np.sqrt(len(model.vocabulary))))

    def test_training_accounts_recovered(self, model, small_dataset):
        """Test predictions on the training accounts match their labels."""
        predictions = predict_dataset(model, small_dataset)

        assert [p.account_id for p in predictions] == small_dataset.account_ids()
        assert all(p.label is small_dataset.labels[p.account_id] for p in predictions)

    def test_unseen_accounts(self, model, separable_dataset):
        """Test accounts outside the training set are classified."""
        unseen = slice_dataset(separable_dataset, accounts=["bot090", "hum090"])

        predictions = {p.account_id: p for p in predict_dataset(model, unseen)}

        assert predictions["bot090"].label is Label.BOT
        assert predictions["hum090"].label is Label.HUMAN
        assert predictions["bot090"].score > 0.5

    def test_same_seed_same_model(self, small_dataset, separable_dataset):
        """Test training is deterministic for a fixed seed."""
        features = extract_features(small_dataset)
        unseen = slice_dataset(separable_dataset, accounts=[f"bot{i:03d}" for i in range(50, 60)])

        first = predict_dataset(train(features, trees=10, seed=5), unseen)
        second = predict_dataset(train(features, trees=10, seed=5), unseen)

        assert first == second

    def test_score_is_vote_fraction(self, model, small_dataset):
        """Test scores are multiples of one tree's vote."""
        for prediction in predict_dataset(model, small_dataset):
            assert prediction.score * TREES == pytest.approx(round(prediction.score * TREES))

    def test_tie_goes_to_human(self):
        """Test an even vote is labeled human."""
        assert botdetect._label_for(0.5) is Label.HUMAN
        assert botdetect._label_for(0.52) is Label.BOT

    def test_duplicated_bots_keep_recall(self, model, small_dataset):
        """Test adding copies of bot rows does not lower training recall for bots."""
        features = extract_features(small_dataset)
        bot_rows = [i for i, label in enumerate(features.labels) if label is Label.BOT]
        duplicated = FeatureMatrix(
            account_ids=features.account_ids + tuple(f"{features.account_ids[i]}-copy" for i in bot_rows),
            matrix=vstack([features.matrix, features.matrix[bot_rows]]).tocsr(),
            vocabulary=features.vocabulary,
            labels=features.labels + tuple(Label.BOT for _ in bot_rows),
            language=features.language,
        )

        def bot_recall(trained):
            predictions = predict_dataset(trained, small_dataset)
            bots = [p for p in predictions if small_dataset.labels[p.account_id] is Label.BOT]
            return sum(p.label is Label.BOT for p in bots) / len(bots)

        assert bot_recall(train(duplicated, trees=TREES, seed=3)) >= bot_recall(model)

    def test_vocabulary_mismatch(self, model):
        """Test a vector over another vocabulary is rejected."""
        vocab = build_vocabulary([{("T", "T"): 1}])
        vector = tf_idf({("T", "T"): 1}, vocab, "stranger")

        with pytest.raises(VocabularyMismatchError):
            predict(model, vector)

    def test_predict_vector(self, model, small_dataset):
        """Test one account vector over the model vocabulary is classified."""
        features = extract_features(small_dataset)
        terms = account_terms(small_dataset, model.language)
        vector = tf_idf(terms["bot005"], model.vocabulary, "bot005")

        assert features.vocabulary == model.vocabulary
        assert predict(model, vector).label is Label.BOT


class TestCrossValidate:
    """Test cases for stratified cross-validation."""

    def test_separable(self, separable_dataset):
        """Test bursty bots are told apart from paced humans."""
        report = cross_validate(separable_dataset, folds=5, trees=TREES, seed=0)

        assert report.f1 >= 0.95
        assert report.accounts == 200
        assert len(report.per_fold) == 5
        assert sum(fold.test_accounts for fold in report.per_fold) == 200

    def test_pooled_confusion(self, separable_dataset):
        """Test report metrics come from confusion counts summed over folds."""
        report = cross_validate(separable_dataset, folds=4, trees=10, seed=1)

        pooled = sum((fold.confusion for fold in report.per_fold), Confusion())
        assert pooled == report.confusion
        assert report.precision == pytest.approx(pooled.precision)
        assert report.f1 == pytest.approx(pooled.f1)

    def test_deterministic(self, small_dataset):
        """Test equal seeds give equal reports."""
        first = cross_validate(small_dataset, folds=4, trees=10, seed=9)
        second = cross_validate(small_dataset, folds=4, trees=10, seed=9)

        assert first.model_dump() == second.model_dump()

    def test_shuffled_labels(self, separable_dataset):
        """Test permuted labels give chance-level F1 on average over several permutations."""
        accounts = separable_dataset.account_ids()
        values = [separable_dataset.labels[account].value for account in accounts]
        scores = []
        for seed in range(5):
            shuffled = np.random.default_rng(seed).permutation(values)
            dataset = relabel(separable_dataset, {a: Label(str(label)) for a, label in zip(accounts, shuffled)})
            scores.append(cross_validate(dataset, folds=5, trees=100, seed=seed).f1)

        assert 0.4 <= float(np.mean(scores)) <= 0.6

    def test_vocabulary_fit_on_training_folds(self, small_dataset):
        """Test each fold's vocabulary sees only its training accounts."""
        with patch("bloc_lang.api.botdetect.build_vocabulary", wraps=build_vocabulary) as spy:
            report = cross_validate(small_dataset, folds=4, trees=5, seed=0)

        sizes = [len(call.args[0]) for call in spy.call_args_list]
        assert sizes == [fold.train_accounts for fold in report.per_fold]
        assert all(size == 30 for size in sizes)

    def test_balance(self, separable_dataset):
        """Test balancing downsamples the majority class."""
        accounts = [f"bot{i:03d}" for i in range(10)] + [f"hum{i:03d}" for i in range(40)]
        dataset = slice_dataset(separable_dataset, accounts=accounts)

        report = cross_validate(dataset, folds=5, trees=5, seed=0, balance=True)

        assert report.accounts == 20

    def test_single_class(self):
        """Test an all-bot dataset cannot be stratified."""
        posts = [post for index in range(6) for post in bot_posts(index)]
        dataset = build_dataset(posts, labels={f"bot{i:03d}": Label.BOT for i in range(6)})

        with pytest.raises(ValidationError, match="too few samples to stratify"):
            cross_validate(dataset, folds=5, trees=5)

    def test_client_uses_classifier_config(self, small_dataset):
        """Test the sub-client reads folds and trees from the configuration."""
        report = Client(trees=7, folds=4, seed=2).bots.evaluate(small_dataset)

        assert report.folds == 4
        assert report.trees == 7
        assert report.seed == 2


class TestModelFile:
    """Test cases for saving and loading models."""

    def test_save_and_load(self, model, small_dataset, tmp_path):
        """Test a reloaded model predicts like the original."""
        path = tmp_path / "model.joblib"
        save_model(model, path)

        loaded = load_model(path)

        assert loaded.vocabulary == model.vocabulary
        assert loaded.language == model.language
        assert predict_dataset(loaded, small_dataset) == predict_dataset(model, small_dataset)

    def test_foreign_header(self, tmp_path):
        """Test a file without the model header is rejected."""
        path = tmp_path / "other.joblib"
        joblib.dump({"header": {"format": "something-else"}, "forest": None}, path)

        with pytest.raises(ModelFormatError, match="header"):
            load_model(path)

    def test_version_mismatch(self, model, tmp_path):
        """Test an unsupported format version is rejected."""
        path = tmp_path / "model.joblib"
        save_model(model, path)
        payload = joblib.load(path)
        payload["header"]["version"] = "0.0"
        joblib.dump(payload, path)

        with pytest.raises(ModelFormatError, match="Unsupported model version"):
            load_model(path)

    def test_missing_file(self, tmp_path):
        """Test an absent model file is a data error."""
        with pytest.raises(DataError, match="Cannot read model file"):
            load_model(tmp_path / "missing.joblib")

