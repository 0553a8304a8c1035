"""Run configuration from key=value files and command-line overrides."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, fields, replace
from enum import Enum
import math
from os import PathLike
from pathlib import Path
from typing import Any

from .exceptions import InvalidConfig, ParseError
from .louvain import LouvainConfig, Objective
from .merging import MergeConfig


class OutputFormat(str, Enum):
    """Format of the result document."""

    JSON = "json"
    CSV = "csv"


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_optional_int(value: str) -> int | None:
    return None if value.strip().lower() in ("", "none") else int(value)


def _parse_thresholds(value: str) -> tuple[float, ...]:
    return tuple(float(part) for part in value.split(",") if part.strip())


def _parse_optional_path(value: str) -> Path | None:
    return Path(value.strip()) if value.strip() else None


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a pipeline run.

    Embeddings are read from ``embeddings`` when it is set and propagated over
    ``hops`` hops otherwise. ``seed`` drives every random choice.
    ``partition_file`` is the partition the ``eval`` command scores.
    """

    content: Path | None = None
    cites: Path | None = None
    embeddings: Path | None = None
    hops: int = 2
    objective: Objective = Objective.MODULARITY_ONLY
    log_base_p: float = math.e
    distance_epsilon: float = 1e-9
    max_levels: int = 20
    max_passes: int = 100
    min_gain: float = 1e-9
    merge: bool = False
    t_initial: float = 0.5
    alpha: float = 0.05
    t_min: float = 0.05
    it_max: int = 100
    target_communities: int | None = None
    outer_max: int = 10
    thresholds: tuple[float, ...] = ()
    nodes_per_class: int = 50
    samples: int = 50
    output: Path | None = None
    output_format: OutputFormat = OutputFormat.JSON
    partition_out: Path | None = None
    partition_file: Path | None = None
    seed: int = 0
    timings: bool = True

    def __post_init__(self) -> None:
        """Coerce enums and validate the nested configurations."""
        try:
            object.__setattr__(self, "objective", Objective(self.objective))
            object.__setattr__(self, "output_format", OutputFormat(self.output_format))
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from exc
        if self.hops < 1:
            raise InvalidConfig(f"hops must be positive, got {self.hops}")
        if self.nodes_per_class < 1 or self.samples < 1:
            raise InvalidConfig("nodes_per_class and samples must be positive")
        # Constructing them validates them.
        self.louvain_config()
        self.merge_config()
        for threshold in self.thresholds:
            self.merge_config(threshold)

    def louvain_config(self) -> LouvainConfig:
        """Louvain parameters of this run."""
        return LouvainConfig(
            objective=self.objective,
            log_base_p=self.log_base_p,
            distance_epsilon=self.distance_epsilon,
            max_levels=self.max_levels,
            max_passes=self.max_passes,
            min_gain=self.min_gain,
            seed=self.seed,
        )

    def merge_config(self, t_initial: float | None = None) -> MergeConfig:
        """Merge parameters of this run, optionally starting from another threshold."""
        start = self.t_initial if t_initial is None else t_initial
        return MergeConfig(
            t_initial=start,
            alpha=self.alpha,
            t_min=min(self.t_min, start),
            it_max=self.it_max,
            target_communities=self.target_communities,
            outer_max=self.outer_max,
        )

    @property
    def embedding_source(self) -> str:
        """``file`` or ``propagate``."""
        return "file" if self.embeddings is not None else "propagate"

    def validate_paths(self) -> None:
        """Check that the dataset and embedding files exist.

        :raises InvalidConfig: if a path is unset or does not exist.
        """
        for name in ("content", "cites"):
            if getattr(self, name) is None:
                raise InvalidConfig(f"Missing dataset path: {name}")
        for name in ("content", "cites", "embeddings", "partition_file"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise InvalidConfig(f"{name} file not found: {path}")

    def as_dict(self) -> dict[str, Any]:
        """Config echo for result documents, in field order."""
        echo: dict[str, Any] = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            echo[item.name] = value
        echo["embedding_source"] = self.embedding_source
        return echo

    @classmethod
    def from_sources(
        cls, file_values: Mapping[str, str] | None = None, overrides: Mapping[str, Any] | None = None
    ) -> RunConfig:
        """Build a configuration from config-file strings overridden by typed values.

        Overrides that are ``None`` are ignored, so unset flags keep file values.

        :raises InvalidConfig: on an unknown key or a value that does not convert.
        """
        known = {item.name for item in fields(cls)}
        values: dict[str, Any] = {}
        for key, raw in (file_values or {}).items():
            if key not in known:
                raise InvalidConfig(f"Unknown config key {key!r}")
            try:
                values[key] = _CONVERTERS.get(key, str)(raw)
            except ValueError as exc:
                raise InvalidConfig(f"Invalid value for {key}: {raw!r}") from exc
        for key, value in (overrides or {}).items():
            if key not in known:
                raise InvalidConfig(f"Unknown config key {key!r}")
            if value is not None:
                values[key] = value
        return replace(cls(), **values)


_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "content": _parse_optional_path,
    "cites": _parse_optional_path,
    "embeddings": _parse_optional_path,
    "output": _parse_optional_path,
    "partition_out": _parse_optional_path,
    "partition_file": _parse_optional_path,
    "hops": int,
    "objective": str.strip,
    "log_base_p": float,
    "distance_epsilon": float,
    "max_levels": int,
    "max_passes": int,
    "min_gain": float,
    "merge": _parse_bool,
    "t_initial": float,
    "alpha": float,
    "t_min": float,
    "it_max": int,
    "target_communities": _parse_optional_int,
    "outer_max": int,
    "thresholds": _parse_thresholds,
    "nodes_per_class": int,
    "samples": int,
    "output_format": str.strip,
    "seed": int,
    "timings": _parse_bool,
}


def parse_config_lines(lines: Iterable[str], source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key = value`` lines. Blank lines and ``#`` comments are skipped.

    :raises ParseError: on a line without ``=`` or with an empty key.
    """
    values: dict[str, str] = {}
    for line_number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"{source}:{line_number}: expected key = value, got {line!r}")
        values[key.strip()] = value.strip()
    return values


def load_config_file(path: str | PathLike[str]) -> dict[str, str]:
    """Read a flat ``key = value`` config file."""
    return parse_config_lines(Path(path).read_text(encoding="utf-8").splitlines(), str(path))
