"""Single configuration surface shared by the library pipeline and CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli

from .ingest import DEFAULT_FILTERED_PORTS


@dataclass
class RunConfig:
    # chunking
    window: float = 10.0
    overlap: float = 2.0
    min_packets: int = 1
    # signal
    delta: float = 1.0
    n_bins: int = 60
    # ingest
    filtered_ports: tuple = tuple(sorted(DEFAULT_FILTERED_PORTS))
    local_endpoint: str | None = None
    # forest
    n_trees: int = 100
    max_depth: int = 32
    min_samples_split: int = 2
    features_per_split: str | int = "sqrt"
    # evaluation
    split_mode: str = "by_capture"  # "by_capture" | "by_chunk"
    ratio: float = 0.8
    seed: int = 7

    def __post_init__(self):
        if self.overlap >= self.window:
            raise ValueError(f"overlap ({self.overlap}) must be smaller than "
                             f"window ({self.window})")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must be in (0, 1)")
        if self.split_mode not in ("by_capture", "by_chunk"):
            raise ValueError(f"unknown split_mode {self.split_mode!r}")

    def to_json(self) -> str:
        """Canonical one-line form, embedded in output artifacts."""
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


def load_config(path=None, **overrides) -> RunConfig:
    """Build a RunConfig from an optional TOML file plus keyword
    overrides (overrides win; None values are ignored)."""
    values = {}
    if path is not None:
        with open(path, "rb") as fh:
            values.update(tomli.load(fh))
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if "filtered_ports" in values:
        values["filtered_ports"] = tuple(sorted(int(p) for p in values["filtered_ports"]))
    return RunConfig(**values)
