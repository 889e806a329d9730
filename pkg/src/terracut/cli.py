"""Command-line entry point.

Subcommands mirror the pipeline stages and can also run standalone against
previously emitted artifacts. Options layer over an optional TOML config
file, which layers over built-in defaults. Exit codes: 0 success, 2 invalid
input or configuration, 3 numerical non-convergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import artifacts, figures, fileio
from .config import RunConfig
from .errors import (
    NonConvergence,
    StageError,
    TerracutError,
    ValidationError,
)
from .ingest import dump_dataset, load_dataset, standardize, synth_dataset
from .lasso import (
    contrasts_vs_reference,
    cv_lambda,
    design_matrix,
    fit,
)
from .pipeline import (
    dataset_from_config,
    default_radius_grid,
    graph_from_config,
    run_pipeline,
)
from .report import cluster_profiles, select_reference
from .selection import select_best, sweep
from .skater import edge_costs, minimum_spanning_tree, skater_partition
from .contiguity import min_connecting_radius


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; flags override it")
    common.add_argument("--outdir", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="master seed for all randomness")
    common.add_argument("--attributes", help="attribute CSV (sets source=files)")
    common.add_argument("--geometry", help="GeoJSON FeatureCollection path")
    common.add_argument(
        "--mode", choices=["indicators", "raw"], help="attribute CSV flavor"
    )
    common.add_argument("--synth-n", dest="synth_n", type=int, help="synthetic units")
    common.add_argument("--synth-p", dest="synth_p", type=int, help="synthetic indicators")
    common.add_argument(
        "--synth-clusters", dest="synth_clusters", type=int, help="planted clusters"
    )
    common.add_argument(
        "--synth-separation", dest="synth_separation", type=float,
        help="attribute separation of planted clusters",
    )
    common.add_argument("--adjacency", choices=["distance", "queen"])
    common.add_argument("--radius", type=float, help="distance threshold in metres")
    common.add_argument("--k", type=int, help="number of clusters")
    common.add_argument("--k-grid", dest="k_grid", type=_int_list, help="sweep k values")
    common.add_argument("--r-grid", dest="r_grid", type=_float_list, help="sweep radii")
    common.add_argument(
        "--no-sweep", dest="run_sweep", action="store_const", const=False,
        help="skip the (k, r) sweep stage",
    )
    common.add_argument("--lambda-policy", dest="lambda_policy", choices=["cv", "fixed"])
    common.add_argument("--lambda-value", dest="lambda_value", type=float)
    common.add_argument("--cv-folds", dest="cv_folds", type=int)
    common.add_argument("--reference", type=int, help="reference cluster id")
    common.add_argument("--curve-lo", dest="curve_lo", type=float)
    common.add_argument("--curve-hi", dest="curve_hi", type=float)
    common.add_argument("--curve-points", dest="curve_points", type=int)
    common.add_argument("--loess-span", dest="loess_span", type=float)
    common.add_argument(
        "--maps-all", dest="maps_all", action="store_const", const=True,
        help="one choropleth per indicator",
    )
    common.add_argument(
        "--dense-matrix", dest="dense_matrix", action="store_const", const=True,
        help="also emit the dense 0/1 adjacency matrix",
    )

    parser = argparse.ArgumentParser(
        prog="terracut",
        description="Contiguity-constrained regionalization with cluster profiling",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("synth", "generate a synthetic dataset and write its canonical files"),
        ("ingest", "load attribute + geometry files and write the canonical dataset"),
        ("graph", "build the contiguity graph and write its edge list"),
        ("cluster", "partition the units and write partition artifacts"),
        ("sweep", "score the (k, radius) grid by mean silhouette"),
        ("fit", "fit the penalized multinomial model on cluster labels"),
        ("report", "write cluster profiles, maps and smoothed scatter figures"),
        ("pipeline", "run every stage and write the manifest"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("fit", "report"):
            sp.add_argument(
                "--partition",
                help="partition CSV from a previous cluster run "
                "(default: cluster in-process)",
            )
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "partition"}
    out = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    if args.attributes or args.geometry:
        out["source"] = "files"
    return out


def _load_partition_labels(path: str, dataset) -> np.ndarray:
    ids, labels = artifacts.read_partition_csv(path)
    if ids != dataset.unit_ids:
        raise ValidationError(
            f"{path}: unit ids do not match the dataset (same units, same order required)"
        )
    return labels


def _partition_for(config: RunConfig, dataset, partition_path: str | None):
    if partition_path:
        labels = _load_partition_labels(partition_path, dataset)
        return None, labels
    graph, _, _ = graph_from_config(config, dataset)
    Z, _ = standardize(dataset.indicators, dataset.indicator_names)
    part = skater_partition(minimum_spanning_tree(edge_costs(graph, Z)), Z, config.k)
    return part, part.labels


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_sources(args.config, _overrides(args))
        return _dispatch(args, config)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc.original)
    except TerracutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, NonConvergence):
        return 3
    if isinstance(exc, OSError):
        return 4
    return 2


def _dispatch(args: argparse.Namespace, config: RunConfig) -> int:
    outdir = Path(config.outdir)
    command = args.command

    if command == "pipeline":
        manifest = run_pipeline(config)
        print(f"wrote {len(manifest['artifacts']) + 1} artifacts to {outdir}")
        sel = manifest["selected"]
        print(
            f"k={sel['k']} lambda={sel['lambda']:.6g} "
            f"reference={sel['reference_cluster']} manifest={manifest['manifest_hash'][:16]}"
        )
        return 0

    if command == "synth":
        config.source = "synth"
        dataset = dataset_from_config(config)
    elif command == "ingest":
        if config.source != "files":
            raise ValidationError("ingest needs --attributes and --geometry")
        dataset = load_dataset(config.attributes, config.geometry, mode=config.mode)
    else:
        dataset = dataset_from_config(config)

    if command in ("synth", "ingest"):
        dump_dataset(
            dataset, outdir / "dataset" / "indicators.csv",
            outdir / "dataset" / "geometry.geojson",
        )
        print(f"wrote dataset ({dataset.n} units, {dataset.p} indicators) to {outdir}/dataset")
        return 0

    if command == "graph":
        graph, radius, r_min = graph_from_config(config, dataset)
        artifacts.write_edges_csv(graph, dataset.unit_ids, outdir / "graph" / "edges.csv")
        if config.dense_matrix:
            artifacts.write_dense_matrix_csv(
                graph, dataset.unit_ids, outdir / "graph" / "adjacency_matrix.csv"
            )
        extra = "" if radius is None else f" (radius {radius:g}, connecting {r_min:g})"
        print(f"wrote {len(graph.edges)} edges to {outdir}/graph{extra}")
        return 0

    if command == "cluster":
        part, _ = _partition_for(config, dataset, None)
        artifacts.write_partition_csv(
            dataset.unit_ids, part, outdir / "cluster" / "partition.csv"
        )
        artifacts.write_cut_edges_csv(
            part, dataset.unit_ids, outdir / "cluster" / "cut_edges.csv"
        )
        artifacts.write_cluster_ssd_json(part, outdir / "cluster" / "cluster_ssd.json")
        print(f"wrote k={part.k} partition (total ssd {part.total_ssd:.6g}) to {outdir}/cluster")
        return 0

    if command == "sweep":
        r_min = min_connecting_radius(dataset.centroids)
        r_grid = config.r_grid if config.r_grid is not None else default_radius_grid(r_min)
        table = sweep(dataset, config.k_grid, r_grid)
        artifacts.write_sweep_csv(table, outdir / "sweep" / "sweep.csv")
        figures.sweep_chart(table, outdir / "sweep" / "silhouette_by_k.svg")
        k, r = select_best(table)
        print(f"wrote sweep to {outdir}/sweep; best k={k} r={r:g}")
        return 0

    if command == "fit":
        _, labels = _partition_for(config, dataset, args.partition)
        design = design_matrix(dataset)
        if config.lambda_policy == "cv":
            cv_seq = np.random.SeedSequence(config.seed).spawn(2)[1]
            cv = cv_lambda(design.X, labels, n_folds=config.cv_folds, seed=cv_seq)
            model = fit(design, labels, lambdas=cv.lambdas)
            index = cv.index
            artifacts.write_cv_csv(
                cv.lambdas, cv.mean_deviance, outdir / "fit" / "cv_deviance.csv"
            )
        else:
            model = fit(design, labels, lambdas=[config.lambda_value])
            index = 0
        coefs = model.path[index]
        artifacts.write_coefficients_csv(
            coefs, design.feature_names, model.classes, outdir / "fit" / "coefficients.csv"
        )
        profiles = cluster_profiles(dataset, labels)
        ref = config.reference if config.reference is not None else select_reference(profiles)
        contrasts = contrasts_vs_reference(coefs, model.class_index(ref))
        artifacts.write_coefficients_csv(
            contrasts, design.feature_names, model.classes,
            outdir / "fit" / "contrasts_vs_reference.csv",
        )
        print(
            f"wrote fit (lambda {coefs.lam:.6g}, {coefs.n_nonzero()} nonzero slopes, "
            f"reference {ref}) to {outdir}/fit"
        )
        return 0

    if command == "report":
        _, labels = _partition_for(config, dataset, args.partition)
        profiles = cluster_profiles(dataset, labels)
        artifacts.write_profiles_json(
            profiles, dataset.indicator_names, outdir / "profiles" / "profiles.json"
        )
        for pr in profiles:
            figures.profile_chart(
                pr, dataset.indicator_names,
                outdir / "profiles" / f"cluster_{pr.cluster:02d}.svg",
            )
        from .svgmap import choropleth_svg

        fileio.atomic_write_text(
            outdir / "maps" / "clusters.svg",
            choropleth_svg(
                dataset.geometries,
                [int(c) for c in labels],
                title=f"clusters (k={len(profiles)})",
                unit_ids=dataset.unit_ids,
            ),
        )
        print(f"wrote {len(profiles)} cluster profiles and maps to {outdir}")
        return 0

    raise ValidationError(f"unknown command {command!r}")


if __name__ == "__main__":
    sys.exit(main())
