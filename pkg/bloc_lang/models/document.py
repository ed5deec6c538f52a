"""
BLOC document: the paired action string and content words of one account.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict

from .alphabet import Word, is_pause, render_word


class BlocDocument(BaseModel):
    """
    An account's BLOC strings.

    ``session_boundaries`` holds the indices of the pause symbols in ``action``,
    i.e. the positions where a new session starts.
    """

    model_config = ConfigDict(frozen=True)

    account_id: str
    action: tuple[str, ...] = ()
    content_words: tuple[Word, ...] = ()
    session_boundaries: tuple[int, ...] = ()

    @property
    def action_count(self) -> int:
        """Number of non-pause symbols, one per post."""
        return sum(1 for symbol in self.action if not is_pause(symbol))

    @property
    def content_stream(self) -> tuple[str, ...]:
        """Content words concatenated in order, without word boundaries."""
        return tuple(symbol for word in self.content_words for symbol in word)

    def is_empty(self) -> bool:
        return not self.action and not any(self.content_words)

    def action_string(self, glyphs: Optional[dict[str, str]] = None) -> str:
        return render_word(self.action, glyphs)

    def content_string(self) -> str:
        return "".join(f"({''.join(word)})" for word in self.content_words)
