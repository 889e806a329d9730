"""End-to-end run: data, graph, clustering, sweep, fit, report, manifest.

Every artifact is written deterministically, then hashed; the manifest
lists all artifacts with their SHA-256 digests plus a digest of itself, so
two runs with the same configuration can be compared by a single hash.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import matplotlib
import numpy as np

from . import __version__, artifacts, figures, fileio
from .config import UNBOUNDED_RADIUS, RunConfig
from .contiguity import (
    distance_adjacency,
    is_connected,
    min_connecting_radius,
    queen_adjacency,
)
from .errors import StageError, TerracutError, ValidationError
from .ingest import dump_dataset, load_dataset, standardize, synth_dataset
from .lasso import (
    contrasts_vs_reference,
    cv_lambda,
    design_matrix,
    fit,
    probability_curves,
)
from .report import cluster_profiles, select_reference
from .selection import select_best, sweep
from .skater import edge_costs, minimum_spanning_tree, skater_partition
from .svgmap import choropleth_svg


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (TerracutError, OSError) as exc:
        raise StageError(name, exc) from exc


def default_radius_grid(r_min: float) -> list[float]:
    """Doubling ladder from the connecting radius, capped by "no limit"."""
    return [r_min, 2.0 * r_min, 4.0 * r_min, 8.0 * r_min, UNBOUNDED_RADIUS]


def pipeline_seeds(config: RunConfig):
    """Independent child seeds for the stages that draw random numbers.

    Spawned from the single configured seed, so the whole run is pinned by
    one integer while data generation and fold assignment stay decoupled.
    """
    return np.random.SeedSequence(config.seed).spawn(2)


def dataset_from_config(config: RunConfig):
    synth_seq, _ = pipeline_seeds(config)
    if config.source == "synth":
        return synth_dataset(
            n=config.synth_n,
            p=config.synth_p,
            n_clusters=config.synth_clusters,
            seed=synth_seq,
            separation=config.synth_separation,
        )
    return load_dataset(config.attributes, config.geometry, mode=config.mode)


def graph_from_config(config: RunConfig, dataset):
    """Contiguity graph per config; returns (graph, radius, min radius).

    ``radius`` is None for queen adjacency. Raises when the graph is
    disconnected, since spanning-tree clustering needs one component.
    """
    r_min = min_connecting_radius(dataset.centroids)
    if config.adjacency == "queen":
        graph = queen_adjacency(dataset.geometries)
        radius = None
    else:
        radius = config.radius if config.radius is not None else r_min
        graph = distance_adjacency(dataset.centroids, radius)
    if not is_connected(graph):
        raise ValidationError(
            f"{graph.construction} graph is disconnected; "
            "increase the radius or check the geometries"
        )
    return graph, radius, r_min


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage and return the manifest (also written to outdir)."""
    config.validate()
    outdir = Path(config.outdir)
    written: list[Path] = []

    def emit(rel: str, writer, *args) -> Path:
        path = outdir / rel
        writer(*args, path)
        written.append(path)
        return path

    _, cv_seq = pipeline_seeds(config)

    with _stage("dataset"):
        dataset = dataset_from_config(config)
        dump_dataset(
            dataset, outdir / "dataset" / "indicators.csv", outdir / "dataset" / "geometry.geojson"
        )
        written.append(outdir / "dataset" / "indicators.csv")
        written.append(outdir / "dataset" / "geometry.geojson")

    with _stage("graph"):
        graph, radius, r_min = graph_from_config(config, dataset)
        emit("graph/edges.csv", artifacts.write_edges_csv, graph, dataset.unit_ids)
        if config.dense_matrix:
            emit(
                "graph/adjacency_matrix.csv",
                artifacts.write_dense_matrix_csv,
                graph,
                dataset.unit_ids,
            )

    with _stage("cluster"):
        if not 1 <= config.k <= dataset.n:
            raise ValidationError(f"k={config.k} impossible for n={dataset.n}")
        Z, params = standardize(dataset.indicators, dataset.indicator_names)
        tree = minimum_spanning_tree(edge_costs(graph, Z))
        partition = skater_partition(tree, Z, config.k)
        emit("cluster/partition.csv", artifacts.write_partition_csv, dataset.unit_ids, partition)
        emit("cluster/cut_edges.csv", artifacts.write_cut_edges_csv, partition, dataset.unit_ids)
        emit("cluster/cluster_ssd.json", artifacts.write_cluster_ssd_json, partition)

    sweep_best = None
    if config.run_sweep:
        with _stage("sweep"):
            r_grid = config.r_grid if config.r_grid is not None else default_radius_grid(r_min)
            table = sweep(dataset, config.k_grid, r_grid)
            emit("sweep/sweep.csv", artifacts.write_sweep_csv, table)
            emit("sweep/silhouette_by_k.svg", figures.sweep_chart, table)
            sweep_best = select_best(table)

    with _stage("fit"):
        design = design_matrix(dataset)
        y = partition.labels
        cv = None
        if config.lambda_policy == "cv":
            cv = cv_lambda(design.X, y, n_folds=config.cv_folds, seed=cv_seq)
            model = fit(design, y, lambdas=cv.lambdas)
            chosen_index = cv.index
            emit("fit/cv_deviance.csv", artifacts.write_cv_csv, cv.lambdas, cv.mean_deviance)
            emit("fit/cv_deviance.svg", figures.cv_chart, cv.lambdas, cv.mean_deviance, cv.lambda_)
        else:
            model = fit(design, y, lambdas=[config.lambda_value])
            chosen_index = 0
        coefs = model.path[chosen_index]
        emit(
            "fit/coefficients.csv",
            artifacts.write_coefficients_csv,
            coefs,
            design.feature_names,
            model.classes,
        )

    with _stage("profiles"):
        profiles = cluster_profiles(dataset, partition.labels, params)
        reference = config.reference if config.reference is not None else select_reference(profiles)
        emit("profiles/profiles.json", artifacts.write_profiles_json, profiles, dataset.indicator_names)
        for pr in profiles:
            emit(
                f"profiles/cluster_{pr.cluster:02d}.svg",
                figures.profile_chart,
                pr,
                dataset.indicator_names,
            )

    with _stage("contrasts"):
        ref_index = model.class_index(reference)
        contrasts = contrasts_vs_reference(coefs, ref_index)
        emit(
            "fit/contrasts_vs_reference.csv",
            artifacts.write_coefficients_csv,
            contrasts,
            design.feature_names,
            model.classes,
        )
        fit_meta = {
            "classes": [int(c) for c in model.classes],
            "lambda_policy": config.lambda_policy,
            "lambda": float(coefs.lam),
            "lambda_index": int(chosen_index),
            "n_lambda": int(len(model.lambdas)),
            "reference_cluster": int(reference),
            "sweeps": int(model.sweeps[chosen_index]),
            "kkt_residual": float(model.kkt_residuals[chosen_index]),
            "nonzero_slopes": coefs.n_nonzero(),
        }
        meta_path = outdir / "fit" / "metadata.json"
        fileio.write_json(meta_path, fit_meta)
        written.append(meta_path)

    with _stage("curves"):
        grid = np.linspace(config.curve_lo, config.curve_hi, config.curve_points)
        for j, name in enumerate(design.feature_names):
            probs = probability_curves(coefs, j, grid)
            emit(f"fit/curves/{name}.csv", artifacts.write_curves_csv, grid, probs, model.classes)
            emit(
                f"fit/curves/{name}.svg",
                figures.curves_chart,
                name,
                grid,
                probs,
                model.classes,
            )

    with _stage("maps"):
        labels_for_map = [int(c) for c in partition.labels]
        emit(
            "maps/clusters.svg",
            _map_writer,
            dataset.geometries,
            labels_for_map,
            f"clusters (k={partition.k})",
            dataset.unit_ids,
        )
        map_indices = range(dataset.p) if config.maps_all else range(min(1, dataset.p))
        for j in map_indices:
            name = dataset.indicator_names[j]
            emit(
                f"maps/{name}.svg",
                _map_writer,
                dataset.geometries,
                dataset.indicators[:, j].astype(float),
                name,
                dataset.unit_ids,
            )

    with _stage("figures"):
        if dataset.p >= 2:
            pairs = _scatter_pairs(dataset.indicator_names)
            for yj, xj in pairs:
                yname = dataset.indicator_names[yj]
                xname = dataset.indicator_names[xj]
                emit(
                    f"figures/scatter_{yname}_vs_{xname}.svg",
                    figures.scatter_smooth_chart,
                    dataset.indicators[:, xj],
                    dataset.indicators[:, yj],
                    xname,
                    yname,
                    config.loess_span,
                )

    with _stage("manifest"):
        manifest = {
            "config": config.to_mapping(),
            "versions": {
                "terracut": __version__,
                "numpy": np.__version__,
                "matplotlib": matplotlib.__version__,
            },
            "selected": {
                "k": int(partition.k),
                "radius": None if radius is None else float(radius),
                "min_connecting_radius": float(r_min),
                "lambda": float(coefs.lam),
                "reference_cluster": int(reference),
                "sweep_best_k": None if sweep_best is None else int(sweep_best[0]),
                "sweep_best_r": None if sweep_best is None else float(sweep_best[1]),
            },
            "artifacts": [
                {
                    "path": str(p.relative_to(outdir)).replace("\\", "/"),
                    "sha256": fileio.sha256_file(p),
                    "bytes": p.stat().st_size,
                }
                for p in sorted(written)
            ],
        }
        manifest["manifest_hash"] = fileio.sha256_bytes(
            fileio.json_dumps(manifest).encode("utf-8")
        )
        fileio.write_json(outdir / "manifest.json", manifest)
    return manifest


def _map_writer(geometries, values, title, unit_ids, path) -> None:
    fileio.atomic_write_text(
        path, choropleth_svg(geometries, values, title=title, unit_ids=unit_ids)
    )


def _scatter_pairs(names: list[str]) -> list[tuple[int, int]]:
    """Coverage against its three headline drivers when the canonical
    indicator set is present; otherwise the first column against the next two."""
    if "coverage" in names:
        y = names.index("coverage")
        wanted = ["female_employment_rate", "grandparent_rate", "ivsm"]
        return [(y, names.index(w)) for w in wanted if w in names]
    return [(0, x) for x in (1, 2) if x < len(names)]
