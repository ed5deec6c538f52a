"""
Unit tests for vocabulary fitting, TF-IDF weighting and cosine similarity.
"""

import io
import math
from collections import Counter

import numpy as np
import pytest

from bloc_lang.api.vectorspace import (
    build_vocabulary,
    cosine,
    idf,
    similarity_matrix,
    tf_idf,
    top_words,
    vectorize,
    write_sparse_matrix,
)
from bloc_lang.exceptions import ValidationError, VocabularyMismatchError
from bloc_lang.models.timeline import Label
from bloc_lang.models.vectors import TfIdfVector, Vocabulary
from bloc_lang.v1 import Client

SYMBOLS = ("T", "p", "r", "t_h", ".", "E", "m")


def random_corpus(seed: int, documents: int = 12) -> dict[str, Counter]:
    rng = np.random.default_rng(seed)
    corpus = {}
    for number in range(documents):
        terms: Counter = Counter()
        for _ in range(int(rng.integers(1, 15))):
            length = int(rng.integers(1, 4))
            word = tuple(SYMBOLS[index] for index in rng.integers(0, len(SYMBOLS), size=length))
            terms[word] += int(rng.integers(1, 4))
        corpus[f"acct{number:02d}"] = terms
    return corpus


class TestVocabulary:
    """Test cases for vocabulary fitting."""

    def test_lexicographic_index(self):
        """Test words are indexed in lexicographic order with document frequencies."""
        vocab = build_vocabulary([Counter({("r",): 2, ("T",): 1}), Counter({("T",): 4})])

        assert vocab.words == (("T",), ("r",))
        assert vocab.document_frequency == (2, 1)
        assert vocab.total_documents == 2
        assert vocab.index_of(("r",)) == 1
        assert vocab.index_of(("x",)) is None

    def test_empty_corpus(self):
        """Test an empty corpus is rejected."""
        with pytest.raises(ValidationError, match="empty corpus"):
            build_vocabulary([])

    def test_fingerprint(self):
        """Test vocabularies with the same words share a fingerprint."""
        first = build_vocabulary([Counter({("T",): 1})])
        second = build_vocabulary([Counter({("T",): 5}), Counter({("T",): 1})])
        third = build_vocabulary([Counter({("r",): 1})])

        assert first.fingerprint == second.fingerprint
        assert first.fingerprint != third.fingerprint

    def test_frequency_bounds(self):
        """Test document frequencies must lie in [1, D]."""
        with pytest.raises(ValueError):
            Vocabulary(words=(("T",),), document_frequency=(3,), total_documents=2)

    def test_word_order(self):
        """Test words must be distinct and lexicographically ordered."""
        with pytest.raises(ValueError, match="lexicographic order"):
            Vocabulary(words=(("r",), ("T",)), document_frequency=(1, 1), total_documents=2)


class TestTfIdf:
    """Test cases for TF-IDF weighting."""

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_formula(self, seed):
        """Test weights on random corpora equal f * (1 + ln(D / d))."""
        corpus = random_corpus(seed)
        vectors = vectorize(corpus)
        vocab = build_vocabulary([corpus[account] for account in sorted(corpus)])
        total = len(corpus)

        for account, terms in corpus.items():
            vector = vectors[account]
            assert len(vector.weights) == len(terms)
            for word, count in terms.items():
                frequency = sum(1 for other in corpus.values() if word in other)
                expected = count * (1 + math.log(total / frequency))
                assert abs(vector.weights[vocab.index_of(word)] - expected) <= 1e-12

    def test_word_in_every_document(self):
        """Test a word present everywhere keeps its raw frequency."""
        vocab = build_vocabulary([Counter({("T",): count}) for count in range(1, 5)])

        assert idf(vocab).tolist() == [1.0]
        assert tf_idf(Counter({("T",): 3}), vocab).weights == {0: 3.0}

    @pytest.mark.parametrize("seed", range(3))
    def test_idf_matches_formula(self, seed):
        """Test IDF factors equal 1 + ln(D / d) for every vocabulary word."""
        corpus = random_corpus(seed)
        vocab = build_vocabulary(list(corpus.values()))

        expected = [1 + math.log(vocab.total_documents / frequency) for frequency in vocab.document_frequency]

        assert np.allclose(idf(vocab), expected, rtol=0, atol=1e-12)

    def test_stored_vocabulary_weighs_like_fitted(self):
        """Test a vocabulary rebuilt from its fields gives the same vectors."""
        corpus = random_corpus(7)
        fitted = build_vocabulary(list(corpus.values()))
        stored = Vocabulary.model_validate(fitted.model_dump())

        assert vectorize(corpus, stored) == vectorize(corpus)

    def test_out_of_vocabulary_dropped(self):
        """Test unknown words are ignored."""
        vocab = build_vocabulary([Counter({("T",): 1})])

        vector = tf_idf(Counter({("T",): 2, ("q",): 9}), vocab, "a")

        assert vector.weights == {0: 2.0}
        assert vector.dimension == 1

    def test_zero_vector(self):
        """Test a multiset with no known words gives the zero vector."""
        vocab = build_vocabulary([Counter({("T",): 1})])

        assert tf_idf(Counter(), vocab).is_zero()


class TestCosine:
    """Test cases for cosine similarity."""

    @pytest.fixture
    def vectors(self) -> dict[str, TfIdfVector]:
        return vectorize(random_corpus(11, documents=6))

    def test_symmetric(self, vectors):
        """Test cos(u, v) == cos(v, u)."""
        accounts = sorted(vectors)
        for first in accounts:
            for second in accounts:
                assert cosine(vectors[first], vectors[second]) == pytest.approx(cosine(vectors[second], vectors[first]))

    def test_self_similarity(self, vectors):
        """Test non-zero vectors are fully similar to themselves."""
        for vector in vectors.values():
            assert cosine(vector, vector) == pytest.approx(1.0)

    def test_scale_invariant(self, vectors):
        """Test scaling either vector does not change similarity."""
        first, second = (vectors[account] for account in sorted(vectors)[:2])

        assert cosine(first.scaled(3.5), second) == pytest.approx(cosine(first, second))

    def test_range(self, vectors):
        """Test similarities stay in [0, 1]."""
        for first in vectors.values():
            for second in vectors.values():
                assert 0.0 <= cosine(first, second) <= 1.0

    def test_zero_vector(self):
        """Test similarity with the zero vector is zero."""
        vocab = build_vocabulary([Counter({("T",): 1})])
        zero = tf_idf(Counter(), vocab, "a")
        other = tf_idf(Counter({("T",): 1}), vocab, "b")

        assert cosine(zero, other) == 0.0
        assert cosine(zero, zero) == 0.0

    def test_vocabulary_mismatch(self):
        """Test vectors over different vocabularies cannot be compared."""
        first = tf_idf(Counter({("T",): 1}), build_vocabulary([Counter({("T",): 1})]), "a")
        second = tf_idf(Counter({("r",): 1}), build_vocabulary([Counter({("r",): 1})]), "b")

        with pytest.raises(VocabularyMismatchError):
            cosine(first, second)

    def test_matrix_agrees(self, vectors):
        """Test the dense similarity matrix agrees with pairwise cosine."""
        ordered = [vectors[account] for account in sorted(vectors)]

        matrix = similarity_matrix(ordered)

        for row, first in enumerate(ordered):
            for column, second in enumerate(ordered):
                assert matrix[row, column] == pytest.approx(cosine(first, second))


class TestTopWords:
    """Test cases for group characterization."""

    def test_ranking_and_ties(self):
        """Test words rank by total count with lexicographic tie-breaks."""
        group = [Counter({("r",): 3, ("T",): 1}), Counter({("p",): 2, ("T",): 1})]

        assert top_words(group, 2) == [("r",), ("T",)]
        assert top_words(group, 10) == [("r",), ("T",), ("p",)]

    def test_invalid_k(self):
        """Test k must be positive."""
        with pytest.raises(ValidationError):
            top_words([Counter({("T",): 1})], 0)

    def test_by_label(self, separable_dataset):
        """Test each label group gets its own ranking."""
        ranked = Client().vectors.top_words_by_label(separable_dataset, 5)

        assert set(ranked) == {Label.BOT, Label.HUMAN}
        assert all(len(group) == 5 for group in ranked.values())
        assert ranked[Label.BOT] != ranked[Label.HUMAN]


class TestSparseMatrix:
    """Test cases for the sparse matrix writer."""

    def test_format(self):
        """Test the header and one line per account in sorted order."""
        corpus = {"b": Counter({("T",): 1}), "a": Counter({("T",): 1, ("r",): 2})}
        vocab = build_vocabulary([corpus["a"], corpus["b"]])
        stream = io.StringIO()

        write_sparse_matrix(vectorize(corpus, vocab), vocab, stream)

        lines = stream.getvalue().splitlines()
        assert lines[0] == "2 2"
        assert lines[1].startswith("a 0:1.0 1:")
        assert lines[2] == "b 0:1.0"
