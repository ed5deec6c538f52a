import logging
from pathlib import Path
from typing import Any, Optional, Union

from bloc_lang.api import Bots, Coordination, Encoder, LanguageModel, Timeline, Tokenizer, Vectors
from bloc_lang.exceptions import ValidationError
from bloc_lang.models.config import RunConfig
from bloc_lang.models.language import LanguageConfig
from bloc_lang.version import __version__

logger = logging.getLogger(__name__)


class Client:
    """
    Main BLOC client binding a run configuration to every pipeline stage.

    This client provides namespaced sub-clients for loading timelines, encoding,
    tokenization, vectors, Markov models, bot detection and coordination detection.

    Example usage:
        client = Client.from_file("run.toml")
        dataset = client.timeline.load("posts.jsonl", labels_path="labels.csv")
        report = client.bots.evaluate(dataset)
    """

    def __init__(
        self,
        config: Optional[RunConfig] = None,
        language: Optional[LanguageConfig] = None,
        **overrides: Any,
    ) -> None:
        """
        Initialize the BLOC client.

        :param config: Run configuration; defaults are used when omitted
        :param language: Language parameters replacing those of ``config``
        :param overrides: Flat configuration keys (``trees=50``, ``threshold=0.9``, ...)
        :raises ValidationError: If ``config`` is not a RunConfig
        :raises ConfigError: If an override is unknown or invalid
        """
        if config is not None and not isinstance(config, RunConfig):
            raise ValidationError("config must be a RunConfig instance")

        run_config = config or RunConfig()
        if overrides:
            run_config = run_config.with_overrides(**overrides)
        if language is not None:
            run_config = run_config.model_copy(update={"language": language})
        self.config = run_config

        # Initialize API sub-clients
        self.timeline = Timeline(self)
        self.encoder = Encoder(self)
        self.tokenizer = Tokenizer(self)
        self.vectors = Vectors(self)
        self.langmodel = LanguageModel(self)
        self.bots = Bots(self)
        self.coordination = Coordination(self)

        logger.info(f"Initialized bloc-lang {__version__} client with seed={self.config.seed}")

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides: Any) -> "Client":
        """
        Create a client from a flat TOML configuration file.

        :raises ConfigError: If the file cannot be read or holds invalid values
        """
        return cls(RunConfig.from_file(path), **overrides)
