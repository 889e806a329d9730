"""Silhouette scoring and the (k, radius) model-selection sweep.

Silhouette uses Euclidean distance on standardized attributes. The sweep
re-clusters the dataset for every grid cell, records mean silhouette per
cell, and select_best picks the argmax with deterministic tie handling
(smaller k first, then smaller radius).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import resolve_threads
from .contiguity import distance_adjacency, is_connected
from .errors import KOutOfRange, NoValidRow, SingleCluster, ValidationError
from .ingest import Dataset, standardize
from .skater import edge_costs, minimum_spanning_tree, skater_partitions


@dataclass(frozen=True)
class SilhouetteResult:
    values: np.ndarray  # (n,) per-point widths
    mean: float


@dataclass(frozen=True)
class SweepRow:
    k: int
    r: float
    silhouette: float | None  # None when the cell could not be scored
    connected: bool


@dataclass(frozen=True)
class SweepTable:
    rows: list[SweepRow]
    k_grid: list[int]
    r_grid: list[float]


def pairwise_distances(Z: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix, computed rowwise to bound memory."""
    Z = np.asarray(Z, dtype=float)
    n, p = Z.shape
    D = np.empty((n, n))
    step = max(1, 2_000_000 // max(1, n * p))
    for a in range(0, n, step):
        blk = Z[a : a + step, None, :] - Z[None, :, :]
        D[a : a + step] = np.sqrt((blk ** 2).sum(axis=2))
    return D


def silhouette(Z: np.ndarray, labels) -> SilhouetteResult:
    """Mean silhouette width of a labeling on attribute matrix Z.

    For each point, a is its mean distance to its own cluster (self
    excluded) and b the smallest mean distance to any other cluster; the
    width is (b - a) / max(a, b). Singleton clusters score 0, as does a
    point with a = b = 0.
    """
    Z = np.asarray(Z, dtype=float)
    labels = np.asarray(labels)
    if Z.ndim != 2 or len(labels) != len(Z):
        raise ValidationError("labels must align with the rows of Z")
    return _silhouette_from_distances(pairwise_distances(Z), labels)


def _silhouette_from_distances(D: np.ndarray, labels) -> SilhouetteResult:
    labels = np.asarray(labels)
    n = len(labels)
    classes, inv = np.unique(labels, return_inverse=True)
    if len(classes) < 2:
        raise SingleCluster(f"silhouette needs >= 2 clusters, got {len(classes)}")
    counts = np.bincount(inv)
    onehot = np.zeros((n, len(classes)))
    onehot[np.arange(n), inv] = 1.0
    sums = D @ onehot

    own = counts[inv]
    a = np.divide(sums[np.arange(n), inv], np.maximum(own - 1, 1))
    mean_other = sums / counts[None, :]
    mean_other[np.arange(n), inv] = np.inf
    b = mean_other.min(axis=1)

    denom = np.maximum(a, b)
    safe = np.where(denom > 0, denom, 1.0)
    s = np.where((own > 1) & (denom > 0), (b - a) / safe, 0.0)
    return SilhouetteResult(values=s, mean=float(s.mean()))


def sweep(dataset: Dataset, k_grid, r_grid, threads: int | None = None) -> SweepTable:
    """Score every (k, r) combination: cluster at radius r, silhouette at k.

    Radii whose distance graph is disconnected produce unscored rows with
    ``connected=False``. Rows come back sorted by k, then r. Radii are
    processed independently (optionally in parallel), and the result is
    identical regardless of thread count.
    """
    k_grid = sorted(set(int(k) for k in k_grid))
    r_grid = sorted(set(float(r) for r in r_grid))
    if not k_grid or not r_grid:
        raise ValidationError("k_grid and r_grid must be non-empty")
    for k in k_grid:
        if not 2 <= k <= dataset.n:
            raise KOutOfRange(k, dataset.n)
    for r in r_grid:
        if not np.isfinite(r) or r <= 0:
            raise ValidationError(f"radius must be positive and finite, got {r!r}")

    Z, _ = standardize(dataset.indicators, dataset.indicator_names)
    D = pairwise_distances(Z)

    def score_radius(r: float) -> dict[int, float | None] | None:
        graph = distance_adjacency(dataset.centroids, r)
        if not is_connected(graph):
            return None
        tree = minimum_spanning_tree(edge_costs(graph, Z))
        parts = skater_partitions(tree, Z, k_grid)
        return {
            k: _silhouette_from_distances(D, parts[k].labels).mean for k in k_grid
        }

    threads = resolve_threads() if threads is None else max(1, int(threads))
    if threads > 1 and len(r_grid) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(r_grid))) as pool:
            by_radius = dict(zip(r_grid, pool.map(score_radius, r_grid)))
    else:
        by_radius = {r: score_radius(r) for r in r_grid}

    rows = []
    for k in k_grid:
        for r in r_grid:
            scores = by_radius[r]
            if scores is None:
                rows.append(SweepRow(k=k, r=r, silhouette=None, connected=False))
            else:
                rows.append(SweepRow(k=k, r=r, silhouette=scores[k], connected=True))
    return SweepTable(rows=rows, k_grid=k_grid, r_grid=r_grid)


def select_best(table: SweepTable) -> tuple[int, float]:
    """(k, r) with the highest silhouette; ties go to smaller k, then smaller r.

    Raises NoValidRow when every cell is disconnected or unscored.
    """
    best: SweepRow | None = None
    for row in table.rows:
        if row.silhouette is None:
            continue
        if (
            best is None
            or row.silhouette > best.silhouette
            or (
                row.silhouette == best.silhouette
                and (row.k, row.r) < (best.k, best.r)
            )
        ):
            best = row
    if best is None:
        raise NoValidRow("no connected, scored sweep cell")
    return best.k, best.r
