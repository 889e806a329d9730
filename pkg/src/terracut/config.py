"""Run configuration: defaults, TOML loading, flag overrides, thread policy."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ParseError, ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

# Stand-in for "no distance limit" in radius grids: far larger than any
# projected CRS extent, so the distance graph is complete.
UNBOUNDED_RADIUS = 1e12


@dataclass
class RunConfig:
    """Everything a pipeline run needs; later sources override earlier ones
    (defaults, then config file, then command-line flags)."""

    source: str = "synth"              # "synth" or "files"
    attributes: str | None = None      # CSV path (source="files")
    geometry: str | None = None        # GeoJSON path (source="files")
    mode: str = "indicators"           # attribute CSV flavor: "indicators"/"raw"
    synth_n: int = 606
    synth_p: int = 13
    synth_clusters: int = 15
    synth_separation: float = 4.0
    adjacency: str = "distance"        # "distance" or "queen"
    radius: float | None = None        # None: smallest radius that connects
    k: int = 15
    k_grid: list[int] = field(default_factory=lambda: list(range(5, 21)))
    r_grid: list[float] | None = None  # None: doubling ladder from the min radius
    run_sweep: bool = True
    lambda_policy: str = "cv"          # "cv" or "fixed"
    lambda_value: float | None = None
    cv_folds: int = 5
    reference: int | None = None       # None: cluster closest to overall average
    curve_lo: float = -3.0
    curve_hi: float = 3.0
    curve_points: int = 61
    loess_span: float = 0.75
    maps_all: bool = False             # one choropleth per indicator
    dense_matrix: bool = False         # also emit the 0/1 adjacency matrix
    seed: int = 0
    outdir: str = "out"

    def validate(self) -> None:
        if self.source not in ("synth", "files"):
            raise ValidationError(f"source must be synth or files, got {self.source!r}")
        if self.source == "files":
            if not self.attributes or not self.geometry:
                raise ValidationError("source=files needs attributes and geometry paths")
            if self.mode not in ("indicators", "raw"):
                raise ValidationError(f"unknown attribute mode {self.mode!r}")
        else:
            if self.synth_n < 2 or self.synth_p < 1 or self.synth_clusters < 1:
                raise ValidationError("synth sizes must be positive (n >= 2)")
        if self.adjacency not in ("distance", "queen"):
            raise ValidationError(f"adjacency must be distance or queen, got {self.adjacency!r}")
        if self.radius is not None and self.radius <= 0:
            raise ValidationError("radius must be positive")
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if not self.k_grid or any(k < 2 for k in self.k_grid):
            raise ValidationError("k_grid entries must be >= 2")
        if self.r_grid is not None and (
            not self.r_grid or any(r <= 0 for r in self.r_grid)
        ):
            raise ValidationError("r_grid entries must be positive")
        if self.lambda_policy not in ("cv", "fixed"):
            raise ValidationError(f"lambda_policy must be cv or fixed, got {self.lambda_policy!r}")
        if self.lambda_policy == "fixed":
            if self.lambda_value is None or self.lambda_value < 0:
                raise ValidationError("lambda_policy=fixed needs a non-negative lambda_value")
        if self.cv_folds < 2:
            raise ValidationError("cv_folds must be at least 2")
        if self.curve_points < 2 or not self.curve_lo < self.curve_hi:
            raise ValidationError("curve grid needs curve_lo < curve_hi and >= 2 points")
        if not 0 < self.loess_span <= 1:
            raise ValidationError("loess_span must lie in (0, 1]")

    @classmethod
    def from_sources(cls, config_path: str | None = None, overrides: dict | None = None) -> "RunConfig":
        values: dict = {}
        if config_path is not None:
            values.update(load_config_file(config_path))
        for key, val in (overrides or {}).items():
            if val is not None:
                values[key] = val
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def to_mapping(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, Path):
                val = str(val)
            out[f.name] = val
        return out


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: invalid TOML: {exc}") from None
    flat = {}
    for key, val in data.items():
        if isinstance(val, dict):
            raise ParseError(f"{path}: nested tables are not supported (key {key!r})")
        flat[key] = val
    return flat


def resolve_threads() -> int:
    """Worker count for intra-stage parallelism.

    TERRACUT_THREADS=0 or unset means "use the machine", any positive
    integer is an explicit cap. Results never depend on the value.
    """
    raw = os.environ.get("TERRACUT_THREADS", "").strip()
    if not raw:
        return min(os.cpu_count() or 1, 8)
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"TERRACUT_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValidationError("TERRACUT_THREADS must be >= 0")
    if value == 0:
        return min(os.cpu_count() or 1, 8)
    return value
