# bloc_lang/exceptions.py

"""
Custom exceptions for the BLOC toolkit.

Every exception carries an ``exit_code`` used by the command-line interface:
2 for bad configuration or arguments, 3 for bad input data, 4 for internal
invariant violations.
"""

from typing import Any, Optional


class BlocError(Exception):
    """Base exception for all BLOC toolkit errors."""

    exit_code: int = 4

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details


class ValidationError(BlocError):
    """Raised when an argument or precondition is invalid."""
    exit_code = 2


class ConfigError(ValidationError):
    """Raised when a configuration file or value cannot be used."""
    pass


class VocabularyMismatchError(ValidationError):
    """Raised when vectors or models built over different vocabularies are combined."""
    pass


class DataError(BlocError):
    """Raised when input data is unreadable or violates the post schema."""
    exit_code = 3


class ModelFormatError(DataError):
    """Raised when a persisted model has a missing or unsupported header."""
    pass


class UnknownStateError(BlocError):
    """Raised when a Markov state has no observed outgoing transitions."""
    pass


class InvariantError(BlocError):
    """Raised when an internal invariant is violated."""
    pass
