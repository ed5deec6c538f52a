"""
First-order Markov chain over BLOC symbols.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from .alphabet import symbol_rank


class TransitionModel(BaseModel):
    """
    Maximum-likelihood transition counts between adjacent symbols.

    Only states with observed outgoing transitions appear in ``counts``;
    unobserved rows are absent rather than zero-filled.
    """

    model_config = ConfigDict(frozen=True)

    counts: dict[str, dict[str, int]] = Field(default_factory=dict)

    def states(self) -> list[str]:
        """All symbols seen as a source or destination, in alphabet order."""
        symbols = set(self.counts)
        for row in self.counts.values():
            symbols.update(row)
        return sorted(symbols, key=lambda symbol: (symbol_rank(symbol), symbol))

    def has_state(self, symbol: str) -> bool:
        return symbol in self.counts

    def outgoing_count(self, symbol: str) -> int:
        return sum(self.counts.get(symbol, {}).values())

    def row(self, symbol: str) -> Optional[dict[str, float]]:
        """Transition probabilities out of ``symbol``, or None for an unobserved state."""
        row = self.counts.get(symbol)
        if not row:
            return None
        total = sum(row.values())
        return {target: count / total for target, count in row.items()}

    def probability(self, source: str, target: str) -> float:
        row = self.row(source)
        return 0.0 if row is None else row.get(target, 0.0)
