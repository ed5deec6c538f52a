import logging
from typing import TYPE_CHECKING, Any, Optional

from bloc_lang.exceptions import ValidationError
from bloc_lang.models.config import RunConfig
from bloc_lang.models.language import LanguageConfig

if TYPE_CHECKING:
    from bloc_lang.v1 import Client

logger = logging.getLogger(__name__)


def validate_non_empty_string(name: str, value: Any) -> None:
    """
    Validate that a parameter is a non-empty string.

    :param name: Parameter name for error messages
    :param value: Value to validate
    :raises ValidationError: If value is not a non-empty string
    """
    if not isinstance(value, str) or not value.strip():
        raise ValidationError(f"Parameter '{name}' must be a non-empty string")


def validate_positive_int(name: str, value: Any, minimum: int = 1) -> None:
    """
    Validate that a parameter is an integer no smaller than ``minimum``.

    :raises ValidationError: If value is not an int or is below the minimum
    """
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"Parameter '{name}' must be an integer >= {minimum}")


def validate_probability(name: str, value: Any) -> None:
    """
    Validate that a parameter is a number in [0, 1].

    :raises ValidationError: If value is not a number in the unit interval
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
        raise ValidationError(f"Parameter '{name}' must be a number in [0, 1]")


class BlocApiBase:
    """
    Base class for all BLOC sub-clients.

    Sub-clients are thin: they read the run configuration from the owning client
    and delegate to the pure module-level operations.

    :param client: An instance of the main Client
    """

    def __init__(self, client: 'Client') -> None:
        self._client = client

    @property
    def config(self) -> RunConfig:
        return self._client.config

    def language(self, preset: Optional[LanguageConfig] = None) -> LanguageConfig:
        """Configured language parameters, falling back to ``preset`` or the defaults."""
        return self.config.language_or(preset or LanguageConfig())
