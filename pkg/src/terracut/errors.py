"""Exception types shared across the package.

Everything raised on bad input derives from ValidationError so the CLI can
map it to a single exit code; NonConvergence is kept separate because it
signals a numerical failure on valid input.
"""

from __future__ import annotations


class TerracutError(Exception):
    """Base class for all package errors."""


class ValidationError(TerracutError):
    """Invalid input data or configuration."""


class ParseError(ValidationError):
    """Malformed input file; message carries file and row/feature context."""


class ZeroDenominator(ValidationError):
    def __init__(self, unit_id: str, indicator: str):
        self.unit_id = unit_id
        self.indicator = indicator
        super().__init__(f"unit {unit_id!r}: zero denominator for {indicator!r}")


class ConstantColumn(ValidationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"indicator {name!r} is constant; cannot standardize")


class IdMismatch(ValidationError):
    def __init__(self, missing_geometry: list[str], missing_attributes: list[str]):
        self.missing_geometry = missing_geometry
        self.missing_attributes = missing_attributes
        parts = []
        if missing_geometry:
            parts.append(f"ids without geometry: {_preview(missing_geometry)}")
        if missing_attributes:
            parts.append(f"ids without attributes: {_preview(missing_attributes)}")
        super().__init__("; ".join(parts) or "id mismatch")


class DegenerateGeometry(ValidationError):
    """Polygon with zero area or too few distinct vertices."""


class DimensionMismatch(ValidationError):
    """Array shapes that do not line up (rows vs graph nodes, etc.)."""


class DisconnectedGraph(ValidationError):
    def __init__(self, n_components: int, detail: str = ""):
        self.n_components = n_components
        msg = f"graph has {n_components} connected components; need 1"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class KOutOfRange(ValidationError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"k={k} outside valid range 1..{n}")


class SingleCluster(ValidationError):
    """Silhouette undefined: fewer than two clusters present."""


class NoValidRow(ValidationError):
    """Sweep produced no connected, scored (k, r) cell to select from."""


class DegenerateClass(ValidationError):
    """A declared class has no observations, or fewer than two classes exist."""


class BadReference(ValidationError):
    def __init__(self, ref, k: int):
        super().__init__(f"reference class {ref!r} not among the {k} fitted classes")


class FoldTooSmall(ValidationError):
    """Cross-validation fold assignment leaves a training split without a class."""


class NonConvergence(TerracutError):
    def __init__(self, lam: float, sweeps: int):
        self.lam = lam
        self.sweeps = sweeps
        super().__init__(
            f"coordinate descent did not converge at lambda={lam:.6g} "
            f"within {sweeps} sweeps"
        )


class StageError(TerracutError):
    """Pipeline stage failure wrapping the original error with stage context."""

    def __init__(self, stage: str, original: BaseException):
        self.stage = stage
        self.original = original
        super().__init__(f"stage {stage!r}: {original}")


def _preview(ids: list[str], limit: int = 10) -> str:
    shown = ", ".join(sorted(ids)[:limit])
    extra = len(ids) - limit
    return shown + (f", ... ({extra} more)" if extra > 0 else "")
