import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from typing import TextIO

from scipy.stats import entropy

from bloc_lang.api.base import BlocApiBase
from bloc_lang.exceptions import UnknownStateError, ValidationError
from bloc_lang.models.alphabet import symbol_rank
from bloc_lang.models.document import BlocDocument
from bloc_lang.models.langmodel import TransitionModel

logger = logging.getLogger(__name__)


def fit_transitions(strings: Iterable[Sequence[str]]) -> TransitionModel:
    """
    Estimate first-order transition probabilities from adjacent symbol pairs.

    Each sequence is counted on its own; sequences are never joined, so no
    transition links the end of one account to the start of another.
    """
    counts: dict[str, Counter[str]] = {}
    sequences = 0
    for sequence in strings:
        sequences += 1
        for source, target in zip(sequence, sequence[1:]):
            counts.setdefault(source, Counter())[target] += 1
    logger.debug(f"Fit transitions over {sequences} sequences, {len(counts)} observed states")
    return TransitionModel(counts={source: dict(row) for source, row in counts.items()})


def predict_next(model: TransitionModel, s: str) -> str:
    """
    Most probable successor of ``s``; ties resolve by the fixed symbol order.

    :raises UnknownStateError: If ``s`` has no observed outgoing transitions
    """
    row = model.row(s)
    if row is None:
        raise UnknownStateError(f"State {s!r} has no observed outgoing transitions")
    return min(row, key=lambda target: (-row[target], symbol_rank(target), target))


def sequence_likelihood(model: TransitionModel, seq: Sequence[str]) -> float:
    """
    Product of the transition probabilities along ``seq``; 0 for any unseen transition.

    :raises ValidationError: If the sequence has fewer than two symbols
    """
    if len(seq) < 2:
        raise ValidationError("Sequence likelihood needs at least two symbols")
    likelihood = 1.0
    for source, target in zip(seq, seq[1:]):
        likelihood *= model.probability(source, target)
        if likelihood == 0.0:
            break
    return likelihood


def symbol_entropy(s: Sequence[str]) -> float:
    """
    Shannon entropy in bits of the empirical symbol distribution of ``s``.

    :raises ValidationError: If ``s`` is empty
    """
    if len(s) == 0:
        raise ValidationError("Entropy of an empty string is undefined")
    counts = Counter(s)
    if len(counts) == 1:
        return 0.0
    return float(entropy(list(counts.values()), base=2))


def write_transition_table(model: TransitionModel, stream: TextIO) -> None:
    """Write ``from,to,prob`` rows in alphabet order."""
    stream.write("from,to,prob\n")
    for source in model.states():
        row = model.row(source)
        if row is None:
            continue
        for target in sorted(row, key=lambda symbol: (symbol_rank(symbol), symbol)):
            stream.write(f"{source},{target},{row[target]!r}\n")


class LanguageModel(BlocApiBase):
    """
    Language model API: Markov chains over action strings.

    Accessed via ``client.langmodel``.
    """

    def fit(self, documents: Iterable[BlocDocument]) -> TransitionModel:
        return fit_transitions(doc.action for doc in documents)

    def entropy(self, doc: BlocDocument) -> float:
        return symbol_entropy(doc.action)
