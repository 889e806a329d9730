"""terracut: contiguity-constrained regionalization with cluster profiling.

Builds a contiguity graph over territorial units, partitions it by pruning
an attribute-weighted spanning tree, selects the clustering by silhouette
over a (k, radius) grid, and characterizes clusters with an L1-penalized
multinomial model. A CLI drives the full pipeline and writes deterministic
delimited, JSON and SVG artifacts under a hashed manifest.
"""

__version__ = "0.1.0"

from .config import UNBOUNDED_RADIUS, RunConfig, resolve_threads
from .contiguity import (
    ContiguityGraph,
    connected_components,
    distance_adjacency,
    is_connected,
    min_connecting_radius,
    queen_adjacency,
)
from .errors import (
    BadReference,
    ConstantColumn,
    DegenerateClass,
    DegenerateGeometry,
    DimensionMismatch,
    DisconnectedGraph,
    FoldTooSmall,
    IdMismatch,
    KOutOfRange,
    NonConvergence,
    NoValidRow,
    ParseError,
    SingleCluster,
    StageError,
    TerracutError,
    ValidationError,
    ZeroDenominator,
)
from .geometry import (
    Geometry,
    MultiPolygon,
    Polygon,
    polygon_centroid,
)
from .ingest import (
    INDICATOR_NAMES,
    RAW_FIELDS,
    Dataset,
    RawCensusRecord,
    StandardizationParams,
    compute_indicators,
    dump_dataset,
    load_dataset,
    national_rates,
    standardize,
    synth_dataset,
)
from .lasso import (
    CoefficientMatrix,
    CvResult,
    DesignMatrix,
    LassoFit,
    contrasts_vs_reference,
    cv_lambda,
    design_matrix,
    fit,
    lambda_max,
    predict_proba,
    probability_curves,
)
from .report import ClusterProfile, cluster_profiles, loess_fit, select_reference
from .selection import (
    SilhouetteResult,
    SweepRow,
    SweepTable,
    pairwise_distances,
    select_best,
    silhouette,
    sweep,
)
from .skater import (
    Partition,
    SpanningTree,
    WeightedEdges,
    cluster_ssd,
    edge_costs,
    minimum_spanning_tree,
    partition_is_contiguous,
    skater_cut_sequence,
    skater_partition,
    skater_partitions,
)
from .svgmap import PALETTE, choropleth_svg

# last: pulls in matplotlib via the figure renderers
from .pipeline import (
    dataset_from_config,
    default_radius_grid,
    graph_from_config,
    run_pipeline,
)

__all__ = [name for name in dir() if not name.startswith("_")]
