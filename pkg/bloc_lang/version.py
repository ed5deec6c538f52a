"""Package version and the schema versions of the files bloc_lang reads and writes."""

from __future__ import annotations

import sys
from importlib import metadata as importlib_metadata
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

DISTRIBUTION = "bloc-lang"

# Bumped whenever the layout of the corresponding file changes.
SCHEMA_VERSIONS: dict[str, int] = {
    "posts-jsonl": 1,
    "graph-json": 1,
    "labels-csv": 1,
    "run-config-toml": 1,
    "encode-tsv": 1,
    "tokenize-tsv": 1,
    "sparse-matrix": 1,
    "transitions-csv": 1,
    "tree-ensemble": 1,
    "community-report-json": 1,
    "coord-eval-csv": 1,
}


def _source_tree_version() -> str | None:
    """Version from ``pyproject.toml`` next to the package, for source checkouts."""
    pyproject_path = Path(__file__).resolve().parent.parent / "pyproject.toml"
    try:
        with pyproject_path.open("rb") as handle:
            project = tomllib.load(handle).get("project", {})
    except (OSError, tomllib.TOMLDecodeError):
        return None
    version = project.get("version") if project.get("name") == DISTRIBUTION else None
    return version if isinstance(version, str) else None


def get_version() -> str:
    """Installed distribution version, else the source tree's, else ``0.0.0``."""
    try:
        return importlib_metadata.version(DISTRIBUTION)
    except importlib_metadata.PackageNotFoundError:
        return _source_tree_version() or "0.0.0"


def describe_versions() -> str:
    """Return the package version followed by one ``format: vN`` line per file format."""
    lines = [f"{DISTRIBUTION} {__version__}"]
    lines.extend(f"{name}: v{version}" for name, version in sorted(SCHEMA_VERSIONS.items()))
    return "\n".join(lines)


__all__ = ["DISTRIBUTION", "SCHEMA_VERSIONS", "__version__", "describe_versions", "get_version"]

__version__ = get_version()
