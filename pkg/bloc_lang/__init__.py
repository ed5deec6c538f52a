"""
bloc-lang - Behavioral Language for Online Classification.

This package encodes social media account timelines as BLOC strings and
builds on them: tokenization, TF-IDF vectors, Markov models, supervised bot
detection and unsupervised coordination detection.
"""

from bloc_lang.exceptions import (
    BlocError,
    ConfigError,
    DataError,
    InvariantError,
    ModelFormatError,
    UnknownStateError,
    ValidationError,
    VocabularyMismatchError,
)
from bloc_lang.models.config import RunConfig
from bloc_lang.models.language import LanguageConfig
from bloc_lang.v1 import Client
from bloc_lang.version import __version__

# Main client class
__all__ = [
    "Client",
    "LanguageConfig",
    "RunConfig",
    "__version__",
    # Exceptions
    "BlocError",
    "ConfigError",
    "DataError",
    "InvariantError",
    "ModelFormatError",
    "UnknownStateError",
    "ValidationError",
    "VocabularyMismatchError",
]
