import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from itertools import groupby
from typing import Optional

from bloc_lang.api.base import BlocApiBase, validate_positive_int
from bloc_lang.models.alphabet import TRUNCATION_MARKER, Word, is_pause, symbol_rank
from bloc_lang.models.document import BlocDocument
from bloc_lang.models.language import LanguageConfig, TokenizationMethod

logger = logging.getLogger(__name__)

TermMultiset = Counter[Word]


def _windows(stream: Sequence[str], n: int) -> Iterable[Word]:
    return (tuple(stream[start:start + n]) for start in range(len(stream) - n + 1))


def tokenize_ngram(doc: BlocDocument, n: int) -> TermMultiset:
    """
    Slide an n-sized window with stride 1 over the action and the content stream.

    Windows cross pause and content-word boundaries but never cross from one stream
    to the other. Streams shorter than ``n`` contribute nothing.

    :raises ValidationError: If n < 1
    """
    validate_positive_int("n", n)
    terms: Counter[Word] = Counter(_windows(doc.action, n))
    terms.update(_windows(doc.content_stream, n))
    return terms


def sort_word(word: Word) -> Word:
    """Sort the symbols of a word by the fixed alphabet order."""
    return tuple(sorted(word, key=lambda symbol: (symbol_rank(symbol), symbol)))


def truncate_word(word: Word, limit: int) -> Word:
    """
    Shorten every run of one repeated symbol of length >= ``limit`` to
    ``limit - 1`` copies followed by ``+``.
    """
    validate_positive_int("limit", limit, minimum=2)
    truncated: list[str] = []
    for symbol, run in groupby(word):
        length = len(list(run))
        if symbol != TRUNCATION_MARKER and length >= limit:
            truncated.extend([symbol] * (limit - 1))
            truncated.append(TRUNCATION_MARKER)
        else:
            truncated.extend([symbol] * length)
    return tuple(truncated)


def split_on_pauses(action: Sequence[str]) -> list[Word]:
    """
    Split an action string into words at pause symbols; each pause is a word of its own.

    Concatenating the returned words in order gives back the action string.
    """
    words: list[Word] = []
    current: list[str] = []
    for symbol in action:
        if is_pause(symbol):
            if current:
                words.append(tuple(current))
                current = []
            words.append((symbol,))
        else:
            current.append(symbol)
    if current:
        words.append(tuple(current))
    return words


def tokenize_pause(doc: BlocDocument, sort: bool = False, truncate: Optional[int] = None) -> TermMultiset:
    """
    Tokenize with pauses as word boundaries.

    Action words are the runs between pause symbols, pause symbols are words of
    their own, and every nonempty content word is one word.

    :param doc: BLOC document
    :param sort: Sort the symbols within each word (p5)
    :param truncate: Truncation length (p6), or None to keep words whole
    """
    words = split_on_pauses(doc.action) + [word for word in doc.content_words if word]
    terms: Counter[Word] = Counter()
    for word in words:
        if sort:
            word = sort_word(word)
        if truncate is not None:
            word = truncate_word(word, truncate)
        terms[word] += 1
    return terms


def tokenize(doc: BlocDocument, cfg: LanguageConfig) -> TermMultiset:
    """Tokenize a document per p4; n-gram mode ignores p5 and p6."""
    if cfg.p4.method is TokenizationMethod.NGRAM:
        return tokenize_ngram(doc, cfg.p4.n)
    return tokenize_pause(doc, sort=cfg.p5, truncate=cfg.p6)


def average_word_length(terms: TermMultiset) -> float:
    """
    Mean number of symbols per word occurrence, excluding the truncation marker.

    Bursty automated accounts produce long pause-delimited words; paced human
    accounts mostly produce single-symbol words.
    """
    occurrences = sum(terms.values())
    if not occurrences:
        return 0.0
    symbols = sum(
        count * sum(1 for symbol in word if symbol != TRUNCATION_MARKER) for word, count in terms.items()
    )
    return symbols / occurrences


class Tokenizer(BlocApiBase):
    """
    Tokenizer API: term multisets under the configured tokenization.

    Accessed via ``client.tokenizer``.
    """

    def tokenize(self, doc: BlocDocument) -> TermMultiset:
        return tokenize(doc, self.language())

    def tokenize_all(self, documents: dict[str, BlocDocument]) -> dict[str, TermMultiset]:
        return {account_id: tokenize(doc, self.language()) for account_id, doc in documents.items()}
