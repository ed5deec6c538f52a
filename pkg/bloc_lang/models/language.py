"""
BLOC language parameters.
"""

import re
from datetime import timedelta
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_DURATION_UNITS = {
    "s": 1,
    "m": 60,
    "min": 60,
    "h": 3600,
    "d": 86400,
    "w": 7 * 86400,
}
_DURATION_PATTERN = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(s|min|m|h|d|w)\s*$")
_NGRAM_PATTERN = re.compile(r"^\s*(?:ngram\s*\(\s*(\d+)\s*\)|ngram[:=](\d+)|(\d+)-gram)\s*$")


def parse_duration(value: Any) -> timedelta:
    """
    Parse a duration with an explicit unit.

    Accepts ``timedelta``, plain numbers (seconds) and strings such as ``"60s"``,
    ``"1m"``, ``"2h"``, ``"1d"`` or ``"2w"``.

    :raises ValueError: If the value cannot be interpreted as a duration
    """
    if isinstance(value, timedelta):
        return value
    if isinstance(value, bool):
        raise ValueError(f"invalid duration: {value!r}")
    if isinstance(value, (int, float)):
        return timedelta(seconds=value)
    if isinstance(value, str):
        match = _DURATION_PATTERN.match(value)
        if match:
            amount, unit = match.groups()
            return timedelta(seconds=float(amount) * _DURATION_UNITS[unit])
    raise ValueError(f"invalid duration {value!r}; use a number with a unit, e.g. '60s', '1m', '2h'")


class PauseFunction(str, Enum):
    """Pause alphabet selector (p2)."""

    F1 = "f1"
    F2 = "f2"


class TokenizationMethod(str, Enum):
    NGRAM = "ngram"
    PAUSE = "pause"


class Tokenization(BaseModel):
    """Tokenization method (p4): ``ngram(n)`` or ``pause``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: TokenizationMethod = TokenizationMethod.PAUSE
    n: int = Field(default=2, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _parse_shorthand(cls, data: Any) -> Any:
        if not isinstance(data, str):
            return data
        text = data.strip().lower()
        if text == "pause":
            return {"method": TokenizationMethod.PAUSE}
        if text == "bigram":
            return {"method": TokenizationMethod.NGRAM, "n": 2}
        match = _NGRAM_PATTERN.match(text)
        if match:
            n = next(group for group in match.groups() if group is not None)
            return {"method": TokenizationMethod.NGRAM, "n": int(n)}
        raise ValueError(f"invalid tokenization {data!r}; use 'pause' or 'ngram(n)'")

    @classmethod
    def ngram(cls, n: int = 2) -> "Tokenization":
        return cls(method=TokenizationMethod.NGRAM, n=n)

    @classmethod
    def pause(cls) -> "Tokenization":
        return cls(method=TokenizationMethod.PAUSE)

    def __str__(self) -> str:
        return f"ngram({self.n})" if self.method is TokenizationMethod.NGRAM else "pause"


class LanguageConfig(BaseModel):
    """
    The six BLOC language parameters.

    * ``p1`` session delimiter threshold
    * ``p2`` pause alphabet (``f1`` dot, ``f2`` log-scale)
    * ``p3`` use sessions for content words
    * ``p4`` tokenization (``ngram(n)`` or ``pause``)
    * ``p5`` sort symbols within words
    * ``p6`` word truncation length, ``None`` when disabled
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    p1: timedelta = timedelta(seconds=60)
    p2: PauseFunction = PauseFunction.F2
    p3: bool = False
    p4: Tokenization = Field(default_factory=Tokenization)
    p5: bool = False
    p6: Optional[int] = None

    @field_validator("p1", mode="before")
    @classmethod
    def _parse_p1(cls, value: Any) -> timedelta:
        return parse_duration(value)

    @field_validator("p1")
    @classmethod
    def _check_p1(cls, value: timedelta) -> timedelta:
        if value.total_seconds() <= 0:
            raise ValueError("p1 must be a positive duration")
        return value

    @field_validator("p6")
    @classmethod
    def _check_p6(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 2:
            raise ValueError("p6 must be at least 2 when enabled")
        return value

    @property
    def session_seconds(self) -> float:
        return self.p1.total_seconds()

    @classmethod
    def bot_detection(cls) -> "LanguageConfig":
        """Parameters used for supervised bot detection: f2 pauses and bi-grams."""
        return cls(p1=timedelta(seconds=60), p2=PauseFunction.F2, p4=Tokenization.ngram(2))

    @classmethod
    def behavioral_clusters(cls) -> "LanguageConfig":
        """Parameters used for behavioral clustering: pause tokens, unsorted, truncated at 4."""
        return cls(p1=timedelta(seconds=60), p2=PauseFunction.F2, p4=Tokenization.pause(), p5=False, p6=4)
