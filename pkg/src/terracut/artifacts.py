"""Frozen on-disk schemas for every delimited artifact, with readers.

Writers format floats at 12 significant digits; each reader inverts its
writer so emitted files round-trip to the in-memory values.
"""

from __future__ import annotations

import numpy as np

from . import fileio
from .contiguity import ContiguityGraph
from .errors import ParseError
from .lasso import CoefficientMatrix
from .report import ClusterProfile
from .selection import SweepRow, SweepTable
from .skater import Partition


# --- contiguity graph -------------------------------------------------------

def write_edges_csv(graph: ContiguityGraph, unit_ids: list[str], path) -> None:
    rows = [
        [str(i), str(j), unit_ids[i], unit_ids[j]]
        for i, j in graph.edges.tolist()
    ]
    fileio.write_csv(path, ["i", "j", "unit_i", "unit_j"], rows)


def read_edges_csv(path) -> np.ndarray:
    header, rows = fileio.read_csv(path)
    if header[:2] != ["i", "j"]:
        raise ParseError(f"{path}: expected edge columns i,j")
    return np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64).reshape(-1, 2)


def write_dense_matrix_csv(graph: ContiguityGraph, unit_ids: list[str], path) -> None:
    dense = np.zeros((graph.n, graph.n), dtype=np.int64)
    for i, j in graph.edges:
        dense[i, j] = dense[j, i] = 1
    rows = [
        [unit_ids[i]] + [str(v) for v in dense[i]] for i in range(graph.n)
    ]
    fileio.write_csv(path, ["unit_id"] + list(unit_ids), rows)


# --- partition ---------------------------------------------------------------

def write_partition_csv(unit_ids: list[str], partition: Partition, path) -> None:
    rows = [[uid, str(int(c))] for uid, c in zip(unit_ids, partition.labels)]
    fileio.write_csv(path, ["unit_id", "cluster"], rows)


def read_partition_csv(path) -> tuple[list[str], np.ndarray]:
    header, rows = fileio.read_csv(path)
    if header != ["unit_id", "cluster"]:
        raise ParseError(f"{path}: expected columns unit_id,cluster")
    ids = [r[0] for r in rows]
    try:
        labels = np.array([int(r[1]) for r in rows], dtype=np.int64)
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer cluster label: {exc}") from None
    return ids, labels


def write_cut_edges_csv(partition: Partition, unit_ids: list[str], path) -> None:
    rows = [
        [str(step + 1), str(int(i)), str(int(j)), unit_ids[int(i)], unit_ids[int(j)]]
        for step, (i, j) in enumerate(partition.cut_edges)
    ]
    fileio.write_csv(path, ["step", "i", "j", "unit_i", "unit_j"], rows)


def write_cluster_ssd_json(partition: Partition, path) -> None:
    fileio.write_json(
        path,
        {
            "k": partition.k,
            "total_ssd": partition.total_ssd,
            "clusters": [
                {
                    "cluster": c + 1,
                    "size": int((partition.labels == c + 1).sum()),
                    "ssd": float(partition.cluster_ssd[c]),
                }
                for c in range(partition.k)
            ],
        },
    )


# --- sweep -------------------------------------------------------------------

def write_sweep_csv(table: SweepTable, path) -> None:
    rows = []
    for row in table.rows:
        rows.append(
            [
                str(row.k),
                fileio.fmt_float(row.r),
                "" if row.silhouette is None else fileio.fmt_float(row.silhouette),
                "true" if row.connected else "false",
            ]
        )
    fileio.write_csv(path, ["k", "r", "silhouette", "connected"], rows)


def read_sweep_csv(path) -> SweepTable:
    header, rows = fileio.read_csv(path)
    if header != ["k", "r", "silhouette", "connected"]:
        raise ParseError(f"{path}: unexpected sweep columns {header}")
    out = []
    for r in rows:
        ctx = f"{path}: k={r[0]} r={r[1]}"
        if r[3] not in ("true", "false"):
            raise ParseError(f"{ctx}: connected must be true/false")
        out.append(
            SweepRow(
                k=int(r[0]),
                r=fileio.parse_float(r[1], ctx),
                silhouette=None if r[2] == "" else fileio.parse_float(r[2], ctx),
                connected=r[3] == "true",
            )
        )
    return SweepTable(
        rows=out,
        k_grid=sorted({row.k for row in out}),
        r_grid=sorted({row.r for row in out}),
    )


# --- coefficients ------------------------------------------------------------

def write_coefficients_csv(
    coefs: CoefficientMatrix, feature_names: list[str], class_labels, path
) -> None:
    """Intercept row plus one row per covariate; one column per class."""
    header = ["variable"] + [f"cluster_{c}" for c in class_labels]
    rows = [["intercept"] + [fileio.fmt_float(v) for v in coefs.intercepts]]
    for j, name in enumerate(feature_names):
        rows.append([name] + [fileio.fmt_float(v) for v in coefs.slopes[j]])
    fileio.write_csv(path, header, rows)


def read_coefficients_csv(path) -> tuple[list[str], list[str], np.ndarray, np.ndarray]:
    """Returns (feature_names, class_labels, intercepts, slopes)."""
    header, rows = fileio.read_csv(path)
    if not rows or header[:1] != ["variable"] or rows[0][0] != "intercept":
        raise ParseError(f"{path}: expected a variable column and an intercept row")
    labels = [c.removeprefix("cluster_") for c in header[1:]]
    intercepts = np.array(
        [fileio.parse_float(v, f"{path}: intercept") for v in rows[0][1:]]
    )
    names = [r[0] for r in rows[1:]]
    slopes = np.array(
        [[fileio.parse_float(v, f"{path}: {r[0]}") for v in r[1:]] for r in rows[1:]]
    ).reshape(len(names), len(labels))
    return names, labels, intercepts, slopes


# --- probability curves ------------------------------------------------------

def write_curves_csv(grid, probs, class_labels, path) -> None:
    probs = np.asarray(probs)
    header = ["value"] + [f"cluster_{c}" for c in class_labels]
    rows = [
        [fileio.fmt_float(g)] + [fileio.fmt_float(v) for v in probs[i]]
        for i, g in enumerate(np.asarray(grid))
    ]
    fileio.write_csv(path, header, rows)


def read_curves_csv(path) -> tuple[np.ndarray, list[str], np.ndarray]:
    header, rows = fileio.read_csv(path)
    if header[:1] != ["value"]:
        raise ParseError(f"{path}: expected a value column")
    labels = [c.removeprefix("cluster_") for c in header[1:]]
    grid = np.array([fileio.parse_float(r[0], path) for r in rows])
    probs = np.array([[fileio.parse_float(v, path) for v in r[1:]] for r in rows])
    return grid, labels, probs


# --- cross-validation --------------------------------------------------------

def write_cv_csv(lambdas, mean_deviance, path) -> None:
    rows = [
        [fileio.fmt_float(lam), fileio.fmt_float(dev)]
        for lam, dev in zip(np.asarray(lambdas), np.asarray(mean_deviance))
    ]
    fileio.write_csv(path, ["lambda", "mean_deviance"], rows)


# --- profiles ----------------------------------------------------------------

def write_profiles_json(profiles: list[ClusterProfile], names: list[str], path) -> None:
    fileio.write_json(
        path,
        {
            "indicators": list(names),
            "national_means": {
                n: float(v) for n, v in zip(names, profiles[0].national_means)
            }
            if profiles
            else {},
            "clusters": [
                {
                    "cluster": pr.cluster,
                    "size": pr.size,
                    "unit_ids": pr.unit_ids,
                    "means": {n: float(v) for n, v in zip(names, pr.means)},
                    "scaled_means": {
                        n: float(v) for n, v in zip(names, pr.scaled_means)
                    },
                }
                for pr in profiles
            ],
        },
    )
