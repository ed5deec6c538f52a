import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from functools import lru_cache
from typing import Optional, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from sklearn.feature_extraction import DictVectorizer
from sklearn.feature_extraction.text import TfidfTransformer
from sklearn.metrics.pairwise import cosine_similarity

from bloc_lang.api.base import BlocApiBase, validate_positive_int
from bloc_lang.api.encoder import encode_dataset
from bloc_lang.api.tokenizer import TermMultiset, tokenize
from bloc_lang.exceptions import ValidationError, VocabularyMismatchError
from bloc_lang.models.alphabet import Word, word_key
from bloc_lang.models.language import LanguageConfig
from bloc_lang.models.timeline import Dataset, Label
from bloc_lang.models.vectors import TfIdfVector, Vocabulary

logger = logging.getLogger(__name__)


def _count_dicts(corpus: Iterable[TermMultiset]) -> list[dict[str, int]]:
    return [{word_key(word): count for word, count in terms.items() if count > 0} for terms in corpus]


class TfIdfWeighting:
    """
    Fitted ``DictVectorizer`` and ``TfidfTransformer`` behind a vocabulary.

    The transformer runs without normalization, smoothing or sublinear scaling,
    so a word counted ``f`` times weighs exactly ``f * (1 + ln(D / d))``.
    """

    def __init__(self, vocabulary: Vocabulary, vectorizer: DictVectorizer, transformer: Optional[TfidfTransformer]):
        self.vocabulary = vocabulary
        self.vectorizer = vectorizer
        self.transformer = transformer

    @staticmethod
    def _transformer() -> TfidfTransformer:
        return TfidfTransformer(norm=None, smooth_idf=False, sublinear_tf=False)

    @classmethod
    def fit(cls, corpus: Sequence[TermMultiset]) -> "TfIdfWeighting":
        """
        Fit on a corpus of term multisets, one per account.

        :raises ValidationError: If the corpus is empty
        """
        if not corpus:
            raise ValidationError("Cannot build a vocabulary from an empty corpus")
        words_by_key = {word_key(word): word for terms in corpus for word, count in terms.items() if count > 0}
        vectorizer = DictVectorizer(sort=True)
        counts = vectorizer.fit_transform(_count_dicts(corpus)).tocsc()
        vocabulary = Vocabulary(
            words=tuple(words_by_key[key] for key in vectorizer.feature_names_),
            document_frequency=tuple(int(frequency) for frequency in np.diff(counts.indptr)),
            total_documents=len(corpus),
        )
        transformer = cls._transformer().fit(counts) if len(vocabulary) else None
        return cls(vocabulary, vectorizer, transformer)

    @classmethod
    def from_vocabulary(cls, vocabulary: Vocabulary) -> "TfIdfWeighting":
        """Refit the pair from a stored vocabulary's document frequencies."""
        keys = [word_key(word) for word in vocabulary.words]
        vectorizer = DictVectorizer(sort=True).fit([dict.fromkeys(keys, 1)])
        if not keys:
            return cls(vocabulary, vectorizer, None)
        frequencies = np.asarray(vocabulary.document_frequency)
        rows = np.concatenate([np.arange(frequency) for frequency in frequencies])
        columns = np.repeat(np.arange(len(keys)), frequencies)
        presence = csr_matrix(
            (np.ones(len(rows)), (rows, columns)), shape=(vocabulary.total_documents, len(keys)),
        )
        return cls(vocabulary, vectorizer, cls._transformer().fit(presence))

    def idf(self) -> np.ndarray:
        """IDF factor of every vocabulary word, in index order."""
        if self.transformer is None:
            return np.zeros(0)
        return self.transformer.idf_.copy()

    def transform(self, corpus: Sequence[TermMultiset]) -> csr_matrix:
        """Weighted rows for a corpus; words outside the vocabulary are dropped."""
        if self.transformer is None:
            return csr_matrix((len(corpus), 0), dtype=np.float64)
        counts = self.vectorizer.transform(_count_dicts(corpus))
        matrix = csr_matrix(self.transformer.transform(counts), dtype=np.float64)
        matrix.eliminate_zeros()
        matrix.sort_indices()
        return matrix

    def vectors(self, corpus: Sequence[TermMultiset], account_ids: Sequence[str]) -> list[TfIdfVector]:
        matrix = self.transform(corpus)
        vectors = []
        for row, account_id in enumerate(account_ids):
            start, end = matrix.indptr[row], matrix.indptr[row + 1]
            vectors.append(TfIdfVector(
                account_id=account_id,
                weights=dict(zip(matrix.indices[start:end].tolist(), matrix.data[start:end].tolist())),
                dimension=len(self.vocabulary),
                vocabulary_fingerprint=self.vocabulary.fingerprint,
            ))
        return vectors


@lru_cache(maxsize=16)
def weighting_for(vocab: Vocabulary) -> TfIdfWeighting:
    """Weighting of a vocabulary that was stored or built elsewhere; cached per vocabulary."""
    return TfIdfWeighting.from_vocabulary(vocab)


def build_vocabulary(corpus: Sequence[TermMultiset]) -> Vocabulary:
    """
    Fit a vocabulary on a corpus of term multisets, one per account.

    :param corpus: Term multisets; D is their number
    :return: Vocabulary indexed in lexicographic word order, with document frequencies
    :raises ValidationError: If the corpus is empty
    """
    vocabulary = TfIdfWeighting.fit(corpus).vocabulary
    logger.debug(f"Built vocabulary of {len(vocabulary)} words over {len(corpus)} documents")
    return vocabulary


def idf(vocab: Vocabulary) -> np.ndarray:
    """IDF factors ``1 + ln(D / d)`` of a vocabulary, read from its fitted transformer."""
    return weighting_for(vocab).idf()


def tf_idf(terms: TermMultiset, vocab: Vocabulary, account_id: str = "") -> TfIdfVector:
    """
    Weight a term multiset: ``w_i = f_i * (1 + ln(D / d_i))``.

    Words outside the vocabulary are dropped; zero counts give no dimension.
    """
    return weighting_for(vocab).vectors([terms], [account_id])[0]


def vectorize(
        terms_by_account: Mapping[str, TermMultiset],
        vocab: Optional[Vocabulary] = None,
) -> dict[str, TfIdfVector]:
    """
    Build TF-IDF vectors for several accounts over a shared vocabulary.

    :param terms_by_account: Term multisets keyed by account id
    :param vocab: Vocabulary to use; fit on ``terms_by_account`` when omitted
    """
    account_ids = sorted(terms_by_account)
    corpus = [terms_by_account[account] for account in account_ids]
    weighting = TfIdfWeighting.fit(corpus) if vocab is None else weighting_for(vocab)
    return dict(zip(account_ids, weighting.vectors(corpus, account_ids)))


def _check_same_space(u: TfIdfVector, v: TfIdfVector) -> None:
    if u.dimension != v.dimension or u.vocabulary_fingerprint != v.vocabulary_fingerprint:
        raise VocabularyMismatchError(
            f"Vectors of {u.account_id!r} and {v.account_id!r} were built over different vocabularies"
        )


def cosine(u: TfIdfVector, v: TfIdfVector) -> float:
    """
    Cosine similarity of two vectors over the same vocabulary, in [0, 1].

    :return: 0.0 when either vector is zero
    :raises VocabularyMismatchError: If the vectors use different vocabularies
    """
    _check_same_space(u, v)
    norm_u = math.sqrt(sum(weight * weight for weight in u.weights.values()))
    norm_v = math.sqrt(sum(weight * weight for weight in v.weights.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    smaller, larger = (u, v) if len(u.weights) <= len(v.weights) else (v, u)
    dot = sum(weight * larger.weights.get(index, 0.0) for index, weight in smaller.weights.items())
    return min(1.0, max(0.0, dot / (norm_u * norm_v)))


def to_matrix(vectors: Sequence[TfIdfVector]) -> csr_matrix:
    """Stack vectors over one vocabulary into a sparse row matrix."""
    if not vectors:
        return csr_matrix((0, 0))
    for vector in vectors[1:]:
        _check_same_space(vectors[0], vector)
    rows, columns, data = [], [], []
    for row, vector in enumerate(vectors):
        for index, weight in vector.weights.items():
            rows.append(row)
            columns.append(index)
            data.append(weight)
    return csr_matrix((data, (rows, columns)), shape=(len(vectors), vectors[0].dimension), dtype=np.float64)


def similarity_matrix(vectors: Sequence[TfIdfVector]) -> np.ndarray:
    """Dense pairwise cosine matrix, clipped to [0, 1]; zero vectors have similarity 0."""
    if not vectors:
        return np.zeros((0, 0))
    matrix = to_matrix(vectors)
    if matrix.shape[1] == 0:
        return np.zeros((len(vectors), len(vectors)))
    return np.clip(cosine_similarity(matrix), 0.0, 1.0)


def top_words(group: Iterable[TermMultiset], k: int) -> list[Word]:
    """
    Rank words by total frequency across a group of accounts.

    Ties are broken lexicographically; ``k`` larger than the vocabulary returns all words.

    :raises ValidationError: If k < 1
    """
    validate_positive_int("k", k)
    totals: Counter[Word] = Counter()
    for terms in group:
        totals.update(terms)
    ranked = sorted((word for word, count in totals.items() if count > 0), key=lambda w: (-totals[w], word_key(w)))
    return ranked[:k]


def account_terms(dataset: Dataset, cfg: LanguageConfig) -> dict[str, TermMultiset]:
    """Encode and tokenize every account of a dataset."""
    documents = encode_dataset(dataset, cfg)
    return {account_id: tokenize(doc, cfg) for account_id, doc in documents.items()}


def write_sparse_matrix(vectors: Mapping[str, TfIdfVector], vocab: Vocabulary, stream: TextIO) -> None:
    """
    Write vectors as ``D k`` followed by ``account_id dim:weight ...`` lines.

    Accounts are written in sorted order; weights use ``repr`` so output is exact
    and reproducible.
    """
    stream.write(f"{vocab.total_documents} {len(vocab)}\n")
    for account_id in sorted(vectors):
        vector = vectors[account_id]
        entries = " ".join(f"{index}:{weight!r}" for index, weight in sorted(vector.weights.items()))
        stream.write(f"{account_id} {entries}".rstrip() + "\n")


class Vectors(BlocApiBase):
    """
    Vector space API: TF-IDF vectors and group characterization.

    Accessed via ``client.vectors``.
    """

    def terms(self, dataset: Dataset) -> dict[str, TermMultiset]:
        return account_terms(dataset, self.language())

    def vectorize(self, dataset: Dataset) -> tuple[Vocabulary, dict[str, TfIdfVector]]:
        """
        Fit a vocabulary on every account of the dataset and weight each account.

        :raises ValidationError: If the dataset has no accounts
        """
        terms = self.terms(dataset)
        vocabulary = build_vocabulary([terms[account] for account in sorted(terms)])
        return vocabulary, vectorize(terms, vocabulary)

    def top_words_by_label(self, dataset: Dataset, k: int) -> dict[Label, list[Word]]:
        """
        Top ``k`` words of each label group of a labeled dataset.

        :raises ValidationError: If the dataset has no labels
        """
        if not dataset.labels:
            raise ValidationError("Top words by label require a labeled dataset")
        terms = self.terms(dataset)
        groups: dict[Label, list[TermMultiset]] = {}
        for account_id, label in sorted(dataset.labels.items()):
            groups.setdefault(label, []).append(terms[account_id])
        return {label: top_words(group, k) for label, group in sorted(groups.items(), key=lambda item: item[0].value)}
