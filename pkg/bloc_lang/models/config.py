"""
Run configuration: language parameters, classifier and coordination settings.

Config files are flat TOML; each key belongs to exactly one group::

    p1 = "60s"
    p4 = "ngram(2)"
    trees = 100
    threshold = 0.98
    seed = 7
"""

import sys
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from bloc_lang.exceptions import ConfigError

from .coorddetect import NATIVE_APPS, SimilarityMethod
from .language import LanguageConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ClassifierConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    trees: int = Field(default=100, ge=1)
    folds: int = Field(default=5, ge=2)
    balance: bool = False
    n_jobs: Optional[int] = None


class CoordinationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    threshold: float = Field(default=0.98, ge=0.0, le=1.0)
    resolution: float = Field(default=1.0, gt=0.0)
    louvain_restarts: int = Field(default=3, ge=1)
    top_accounts: Optional[int] = Field(default=1000, ge=1)
    method: SimilarityMethod = SimilarityMethod.BLOC
    k_max: int = Field(default=10, ge=1)
    window_weeks: int = Field(default=2, ge=1)
    max_windows: Optional[int] = Field(default=None, ge=1)
    native_apps: frozenset[str] = NATIVE_APPS


class PathsConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    data: Optional[Path] = None
    graph: Optional[Path] = None
    labels: Optional[Path] = None
    output: Optional[Path] = None


class RunConfig(BaseModel):
    """Everything a CLI run needs; validated before any pipeline stage starts."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    language: Optional[LanguageConfig] = None
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    coordination: CoordinationConfig = Field(default_factory=CoordinationConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    seed: int = 0

    @classmethod
    def from_flat(cls, values: dict[str, Any]) -> "RunConfig":
        """
        Build a RunConfig from flat key-value pairs.

        :param values: Mapping of keys such as ``p1``, ``trees``, ``threshold``, ``seed``
        :return: Validated RunConfig
        :raises ConfigError: For unknown keys or invalid values
        """
        groups: dict[str, dict[str, Any]] = {name: {} for name in _GROUPS}
        top_level: dict[str, Any] = {}
        unknown = []
        for key, value in values.items():
            if key == "seed":
                top_level[key] = value
                continue
            group = _KEY_TO_GROUP.get(key)
            if group is None:
                unknown.append(key)
            else:
                groups[group][key] = value
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(sorted(unknown))}")

        # Language parameters stay unset unless given, so each pipeline can apply its own preset.
        try:
            return cls(
                **top_level,
                **{name: _GROUPS[name](**group) for name, group in groups.items() if group or name != "language"},
            )
        except PydanticValidationError as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Load a flat TOML configuration file.

        :raises ConfigError: If the file is unreadable, not TOML, or contains invalid values
        """
        config_path = Path(path)
        try:
            with config_path.open("rb") as handle:
                values = tomllib.load(handle)
        except OSError as exc:
            raise ConfigError(f"Cannot read configuration file {config_path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"Invalid TOML in {config_path}: {exc}") from exc

        nested = sorted(key for key, value in values.items() if isinstance(value, dict))
        if nested:
            raise ConfigError(f"Configuration must be flat; found tables: {', '.join(nested)}")
        return cls.from_flat(values)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a copy with the non-None flat overrides applied (used for CLI flags)."""
        flat = self.to_flat()
        flat.update({key: value for key, value in overrides.items() if value is not None})
        return RunConfig.from_flat(flat)

    def language_or(self, default: LanguageConfig) -> LanguageConfig:
        """Configured language parameters, or ``default`` when none were given."""
        return self.language if self.language is not None else default

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {"seed": self.seed}
        for name in _GROUPS:
            group: Optional[BaseModel] = getattr(self, name)
            if group is None:
                continue
            flat.update({key: getattr(group, key) for key in type(group).model_fields})
        return flat


_GROUPS: dict[str, type[BaseModel]] = {
    "language": LanguageConfig,
    "classifier": ClassifierConfig,
    "coordination": CoordinationConfig,
    "paths": PathsConfig,
}
_KEY_TO_GROUP: dict[str, str] = {key: name for name, model in _GROUPS.items() for key in model.model_fields}
