"""Cluster summaries and scatterplot smoothing for the report stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadReference, ValidationError
from .ingest import Dataset, StandardizationParams, standardize


@dataclass(frozen=True)
class ClusterProfile:
    cluster: int
    size: int
    unit_ids: list[str]
    means: np.ndarray         # raw indicator means
    scaled_means: np.ndarray  # means in standardized space
    national_means: np.ndarray


def cluster_profiles(
    dataset: Dataset,
    labels,
    params: StandardizationParams | None = None,
) -> list[ClusterProfile]:
    """Per-cluster indicator means, raw and standardized, plus national means.

    Clusters come back ordered by id. ``params`` defaults to standardization
    constants computed from the dataset itself.
    """
    labels = np.asarray(labels)
    if len(labels) != dataset.n:
        raise ValidationError("labels must align with dataset rows")
    if params is None:
        _, params = standardize(dataset.indicators, dataset.indicator_names)
    Z = params.transform(dataset.indicators)
    national = dataset.indicators.mean(axis=0)
    profiles = []
    for c in np.unique(labels):
        mask = labels == c
        profiles.append(
            ClusterProfile(
                cluster=int(c),
                size=int(mask.sum()),
                unit_ids=[u for u, m in zip(dataset.unit_ids, mask) if m],
                means=dataset.indicators[mask].mean(axis=0),
                scaled_means=Z[mask].mean(axis=0),
                national_means=national,
            )
        )
    return profiles


def select_reference(profiles: list[ClusterProfile]) -> int:
    """Cluster whose standardized mean profile is closest to the overall
    average (smallest L2 norm); ties go to the smaller cluster id."""
    if not profiles:
        raise BadReference(None, 0)
    best = min(profiles, key=lambda pr: (float(np.linalg.norm(pr.scaled_means)), pr.cluster))
    return best.cluster


def loess_fit(x, y, span: float = 0.75) -> np.ndarray:
    """Locally weighted linear smoother (tricube weights), fitted at each x.

    Each point is fitted from its ceil(span * n) nearest neighbours along x
    (distance ties broken by index). A neighbourhood whose x-values are all
    identical, or whose weighted x-variance vanishes, falls back to the
    weighted mean of its y-values.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError("x and y must be equal-length vectors")
    if len(x) < 3:
        raise ValidationError("need at least 3 points to smooth")
    if not 0 < span <= 1:
        raise ValidationError("span must lie in (0, 1]")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("non-finite values in x or y")

    n = len(x)
    q = min(n, max(2, int(np.ceil(span * n))))
    idx_all = np.arange(n)
    fitted = np.empty(n)
    for i in range(n):
        d = np.abs(x - x[i])
        near = np.lexsort((idx_all, d))[:q]
        dn = d[near]
        h = float(dn[-1])
        if h == 0.0:
            fitted[i] = float(y[near].mean())
            continue
        w = (1.0 - (dn / h) ** 3) ** 3
        w = np.maximum(w, 0.0)
        sw = float(w.sum())
        if sw == 0.0:
            fitted[i] = float(y[near].mean())
            continue
        xm = float(w @ x[near]) / sw
        ym = float(w @ y[near]) / sw
        xc = x[near] - xm
        den = float(w @ (xc * xc))
        if den == 0.0:
            fitted[i] = ym
            continue
        slope = float(w @ (xc * (y[near] - ym))) / den
        fitted[i] = ym + slope * (x[i] - xm)
    return fitted
