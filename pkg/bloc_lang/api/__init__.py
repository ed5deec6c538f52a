"""Convenience re-exports for BLOC sub-clients."""

from bloc_lang.api.base import BlocApiBase, validate_non_empty_string, validate_positive_int, validate_probability
from bloc_lang.api.botdetect import Bots
from bloc_lang.api.coorddetect import Coordination
from bloc_lang.api.encoder import Encoder
from bloc_lang.api.langmodel import LanguageModel
from bloc_lang.api.timeline import Timeline
from bloc_lang.api.tokenizer import Tokenizer
from bloc_lang.api.vectorspace import Vectors

__all__ = [
    "BlocApiBase",
    "Bots",
    "Coordination",
    "Encoder",
    "LanguageModel",
    "Timeline",
    "Tokenizer",
    "Vectors",
    "validate_non_empty_string",
    "validate_positive_int",
    "validate_probability",
]
