"""
BLOC alphabets.

Symbols are plain strings. Multi-character pause symbols (``t_h`` ... ``t_z``)
are atomic: a word is a tuple of symbols, never a raw string, so ``t_h``
always counts as one symbol.
"""

from enum import Enum
from typing import Optional

# Action alphabet
POST = "T"
REPLY_FRIEND = "P"
REPLY_NON_FRIEND = "p"
REPLY_SELF = "π"
RESHARE_FRIEND = "R"
RESHARE_NON_FRIEND = "r"
RESHARE_SELF = "ρ"

ACTION_SYMBOLS: tuple[str, ...] = (
    POST, REPLY_FRIEND, REPLY_NON_FRIEND, REPLY_SELF, RESHARE_FRIEND, RESHARE_NON_FRIEND, RESHARE_SELF,
)

# Pause alphabets: f1 uses the dot, f2 the log-scale symbols, shortest first.
SESSION_PAUSE = "."
PAUSE_HOUR = "t_h"
PAUSE_DAY = "t_d"
PAUSE_WEEK = "t_w"
PAUSE_MONTH = "t_m"
PAUSE_YEAR = "t_y"
PAUSE_LONGER = "t_z"

LOG_PAUSE_SYMBOLS: tuple[str, ...] = (PAUSE_HOUR, PAUSE_DAY, PAUSE_WEEK, PAUSE_MONTH, PAUSE_YEAR, PAUSE_LONGER)
PAUSE_SYMBOLS: tuple[str, ...] = (SESSION_PAUSE, *LOG_PAUSE_SYMBOLS)

# Content alphabet, in within-word emission order.
MEDIA = "E"
HASHTAG = "H"
MENTION_FRIEND = "M"
MENTION_NON_FRIEND = "m"
QUOTE_OTHER = "q"
QUOTE_SELF = "φ"
TEXT = "t"
LINK = "U"

CONTENT_SYMBOLS: tuple[str, ...] = (
    MEDIA, HASHTAG, MENTION_FRIEND, MENTION_NON_FRIEND, QUOTE_OTHER, QUOTE_SELF, TEXT, LINK,
)

TRUNCATION_MARKER = "+"

# Fixed total order used for sorting words and breaking ties.
SYMBOL_ORDER: dict[str, int] = {
    symbol: rank
    for rank, symbol in enumerate((*ACTION_SYMBOLS, *PAUSE_SYMBOLS, *CONTENT_SYMBOLS, TRUNCATION_MARKER))
}

DEFAULT_PAUSE_GLYPHS: dict[str, str] = {
    PAUSE_HOUR: "□h",
    PAUSE_DAY: "□d",
    PAUSE_WEEK: "□w",
    PAUSE_MONTH: "□m",
    PAUSE_YEAR: "□y",
    PAUSE_LONGER: "□z",
}

Word = tuple[str, ...]


class Relation(str, Enum):
    """Relation between an actor and the account it interacts with."""

    SELF = "self"
    FRIEND = "friend"
    NON_FRIEND = "non_friend"


def is_pause(symbol: str) -> bool:
    """Return True for pause symbols of either pause alphabet."""
    return symbol in PAUSE_SYMBOLS


def symbol_rank(symbol: str) -> int:
    """Rank of a symbol in the fixed alphabet order; unknown symbols sort last."""
    return SYMBOL_ORDER.get(symbol, len(SYMBOL_ORDER))


def word_key(word: Word) -> str:
    """Lexicographic key of a word (its symbols concatenated)."""
    return "".join(word)


def render_word(word: Word, glyphs: Optional[dict[str, str]] = None) -> str:
    """Render a word as text, replacing multi-character pause symbols with glyphs."""
    mapping = DEFAULT_PAUSE_GLYPHS if glyphs is None else glyphs
    return "".join(mapping.get(symbol, symbol) for symbol in word)
