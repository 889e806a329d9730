"""Dataset loading, indicator construction, standardization, synthetic data.

A dataset couples a unit-by-indicator matrix with one polygon per unit.
Raw municipal census records are reduced to 13 per-unit indicators; the
indicator order below is frozen because downstream coefficient tables and
probability curves are reported per indicator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fileio
from .errors import (
    ConstantColumn,
    IdMismatch,
    ParseError,
    ValidationError,
    ZeroDenominator,
)
from .geometry import (
    Geometry,
    Polygon,
    polygon_centroid,
    geometry_from_geojson,
    geometry_to_geojson,
)

# Raw census fields per territorial unit (counts unless noted).
RAW_FIELDS = (
    "resident_children_0_2",
    "daycare_places",
    "public_expenditure",       # currency, for children aged 0-2
    "resident_females_20_64",
    "working_females_20_64",
    "females_at_home",          # housewives
    "commuters",                # workers employed outside the unit
    "workers",
    "males_over_20",
    "males_high_degree",
    "females_over_20",
    "females_high_degree",
    "foreign_residents",
    "residents",
    "retired_residents",
    "non_working_females_15_25",
    "household_members_avg",    # real-valued average
    "children_age_0",
    "females_15_49",
    "ivsm",                     # composite material/social vulnerability score
)

INDICATOR_NAMES = (
    "coverage",
    "expenditure_rate",
    "female_employment_rate",
    "female_house_rate",
    "commuter_rate",
    "male_education_rate",
    "female_education_rate",
    "foreign_rate",
    "grandparent_rate",
    "babysitter_rate",
    "household_members",
    "fertility_rate",
    "ivsm",
)

# indicator -> (numerator field, denominator field); None denominator means
# the raw field passes through unchanged.
_RATIOS: dict[str, tuple[str, str | None]] = {
    "coverage": ("daycare_places", "resident_children_0_2"),
    "expenditure_rate": ("public_expenditure", "resident_children_0_2"),
    "female_employment_rate": ("working_females_20_64", "resident_females_20_64"),
    "female_house_rate": ("females_at_home", "resident_children_0_2"),
    "commuter_rate": ("commuters", "workers"),
    "male_education_rate": ("males_high_degree", "males_over_20"),
    "female_education_rate": ("females_high_degree", "females_over_20"),
    "foreign_rate": ("foreign_residents", "residents"),
    "grandparent_rate": ("retired_residents", "resident_children_0_2"),
    "babysitter_rate": ("non_working_females_15_25", "resident_children_0_2"),
    "household_members": ("household_members_avg", None),
    "fertility_rate": ("children_age_0", "females_15_49"),
    "ivsm": ("ivsm", None),
}


@dataclass(frozen=True)
class RawCensusRecord:
    unit_id: str
    values: dict[str, float]

    def __post_init__(self):
        missing = [f for f in RAW_FIELDS if f not in self.values]
        if missing:
            raise ValidationError(f"unit {self.unit_id!r}: missing fields {missing}")
        for name in RAW_FIELDS:
            v = self.values[name]
            if not np.isfinite(v):
                raise ValidationError(f"unit {self.unit_id!r}: non-finite {name}")
            if name not in ("ivsm", "household_members_avg") and v < 0:
                raise ValidationError(f"unit {self.unit_id!r}: negative {name}")


def compute_indicators(records: list[RawCensusRecord]) -> np.ndarray:
    """Reduce raw records to the (n, 13) indicator matrix in frozen order."""
    out = np.empty((len(records), len(INDICATOR_NAMES)))
    for i, rec in enumerate(records):
        for j, name in enumerate(INDICATOR_NAMES):
            num_field, den_field = _RATIOS[name]
            num = rec.values[num_field]
            if den_field is None:
                out[i, j] = num
                continue
            den = rec.values[den_field]
            if den == 0:
                raise ZeroDenominator(rec.unit_id, name)
            out[i, j] = num / den
    return out


def national_rates(records: list[RawCensusRecord]) -> dict[str, float]:
    """Country-level indicator values: ratios of summed counts.

    Pass-through indicators (household size, vulnerability score) are
    averaged with resident weights instead, since they have no count
    numerator to pool.
    """
    rates = {}
    residents = np.array([r.values["residents"] for r in records], dtype=float)
    if residents.sum() == 0:
        raise ValidationError("no residents in any unit")
    for name in INDICATOR_NAMES:
        num_field, den_field = _RATIOS[name]
        nums = np.array([r.values[num_field] for r in records], dtype=float)
        if den_field is None:
            rates[name] = float(nums @ residents / residents.sum())
        else:
            dens = np.array([r.values[den_field] for r in records], dtype=float)
            if dens.sum() == 0:
                raise ZeroDenominator("<national>", name)
            rates[name] = float(nums.sum() / dens.sum())
    return rates


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column centering and scaling constants (population SD)."""

    means: np.ndarray
    sds: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.sds

    def inverse(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.sds + self.means


def standardize(X: np.ndarray, names=None) -> tuple[np.ndarray, StandardizationParams]:
    """Center each column and scale by its population standard deviation.

    Raises ConstantColumn when a column has zero variance, since such a
    column cannot carry cluster information and would divide by zero.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("standardize needs a 2-d matrix with >= 2 rows")
    if not np.all(np.isfinite(X)):
        raise ValidationError("indicator matrix has non-finite entries")
    means = X.mean(axis=0)
    sds = X.std(axis=0)  # ddof=0
    for j, sd in enumerate(sds):
        if sd == 0.0:
            raise ConstantColumn(names[j] if names is not None else f"column {j}")
    params = StandardizationParams(means=means, sds=sds)
    return params.transform(X), params


@dataclass
class Dataset:
    """Territorial units: ids, indicator matrix, polygons in a metric CRS."""

    unit_ids: list[str]
    indicators: np.ndarray
    indicator_names: list[str]
    geometries: list[Geometry]
    centroids: np.ndarray
    region_labels: list[str] | None = None

    @property
    def n(self) -> int:
        return len(self.unit_ids)

    @property
    def p(self) -> int:
        return self.indicators.shape[1]


def _build_dataset(unit_ids, indicators, names, geom_by_id, regions) -> Dataset:
    order = np.argsort(unit_ids)
    unit_ids = [unit_ids[i] for i in order]
    indicators = np.asarray(indicators, dtype=float)[order]
    geometries = [geom_by_id[u] for u in unit_ids]
    centroids = np.array([polygon_centroid(g) for g in geometries])
    region_labels = None
    if regions is not None:
        region_labels = [regions[i] for i in order]
    return Dataset(
        unit_ids=unit_ids,
        indicators=indicators,
        indicator_names=list(names),
        geometries=geometries,
        centroids=centroids,
        region_labels=region_labels,
    )


def load_dataset(attributes_path, geometry_path, mode: str = "indicators") -> Dataset:
    """Load a dataset from an attribute CSV plus a GeoJSON FeatureCollection.

    ``mode="indicators"``: the CSV carries ``unit_id``, an optional ``region``
    column, and one numeric column per indicator (kept in file order).
    ``mode="raw"``: the CSV carries ``unit_id``, optional ``region``, and
    exactly the 20 raw census fields; indicators are computed here.

    Unit ids must match one-to-one between the two files. Rows are sorted by
    unit id, so the result is independent of input row order.
    """
    if mode not in ("indicators", "raw"):
        raise ValidationError(f"unknown ingest mode {mode!r}")
    header, rows = fileio.read_csv(attributes_path)
    if "unit_id" not in header:
        raise ParseError(f"{attributes_path}: missing unit_id column")
    id_col = header.index("unit_id")
    region_col = header.index("region") if "region" in header else None
    value_cols = [
        (j, name)
        for j, name in enumerate(header)
        if j not in (id_col, region_col)
    ]
    if mode == "raw":
        expected = set(RAW_FIELDS)
        got = {name for _, name in value_cols}
        if got != expected:
            extra = sorted(got - expected)
            missing = sorted(expected - got)
            raise ParseError(
                f"{attributes_path}: raw columns mismatch"
                + (f"; unexpected {extra}" if extra else "")
                + (f"; missing {missing}" if missing else "")
            )
    elif not value_cols:
        raise ParseError(f"{attributes_path}: no indicator columns")

    unit_ids: list[str] = []
    regions: list[str] | None = [] if region_col is not None else None
    seen = set()
    raw_records: list[RawCensusRecord] = []
    matrix: list[list[float]] = []
    for i, row in enumerate(rows):
        line = i + 2
        uid = row[id_col].strip()
        if not uid:
            raise ParseError(f"{attributes_path}: line {line}: empty unit_id")
        if uid in seen:
            raise ParseError(f"{attributes_path}: line {line}: duplicate unit_id {uid!r}")
        seen.add(uid)
        unit_ids.append(uid)
        if regions is not None:
            regions.append(row[region_col].strip())
        values = {
            name: fileio.parse_float(row[j], f"{attributes_path}: line {line}, {name}")
            for j, name in value_cols
        }
        if mode == "raw":
            try:
                raw_records.append(RawCensusRecord(uid, values))
            except ValidationError as exc:
                raise ParseError(f"{attributes_path}: line {line}: {exc}") from exc
        else:
            matrix.append([values[name] for _, name in value_cols])

    if mode == "raw":
        indicators = compute_indicators(raw_records)
        names = INDICATOR_NAMES
    else:
        indicators = np.asarray(matrix, dtype=float)
        names = [name for _, name in value_cols]

    geom_by_id = _load_geometries(geometry_path)
    attr_ids = set(unit_ids)
    geom_ids = set(geom_by_id)
    if attr_ids != geom_ids:
        raise IdMismatch(
            missing_geometry=sorted(attr_ids - geom_ids),
            missing_attributes=sorted(geom_ids - attr_ids),
        )
    return _build_dataset(unit_ids, indicators, names, geom_by_id, regions)


def _load_geometries(path) -> dict[str, Geometry]:
    obj = fileio.read_json(path)
    if not isinstance(obj, dict) or obj.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    out: dict[str, Geometry] = {}
    for idx, feature in enumerate(obj.get("features", [])):
        props = feature.get("properties") or {}
        uid = props.get("unit_id")
        if not uid:
            raise ParseError(f"{path}: feature {idx}: missing properties.unit_id")
        uid = str(uid)
        if uid in out:
            raise ParseError(f"{path}: feature {idx}: duplicate unit_id {uid!r}")
        try:
            out[uid] = geometry_from_geojson(feature.get("geometry"))
        except ParseError as exc:
            raise ParseError(f"{path}: feature {idx} ({uid}): {exc}") from exc
    if not out:
        raise ParseError(f"{path}: no features")
    return out


def dump_dataset(dataset: Dataset, attributes_path, geometry_path) -> None:
    """Write the canonical on-disk form: indicator CSV plus GeoJSON."""
    header = ["unit_id"]
    if dataset.region_labels is not None:
        header.append("region")
    header.extend(dataset.indicator_names)
    rows = []
    for i, uid in enumerate(dataset.unit_ids):
        row = [uid]
        if dataset.region_labels is not None:
            row.append(dataset.region_labels[i])
        row.extend(fileio.fmt_float(v) for v in dataset.indicators[i])
        rows.append(row)
    fileio.write_csv(attributes_path, header, rows)

    features = [
        {
            "type": "Feature",
            "properties": {"unit_id": uid},
            "geometry": geometry_to_geojson(geom),
        }
        for uid, geom in zip(dataset.unit_ids, dataset.geometries)
    ]
    fileio.write_json(geometry_path, {"type": "FeatureCollection", "features": features})


def synth_dataset(
    n: int,
    p: int,
    n_clusters: int,
    seed=0,
    separation: float = 4.0,
) -> Dataset:
    """Generate a planted-cluster dataset with square unit polygons.

    Cluster centers sit on a coarse grid; units scatter around their center
    with jitter far smaller than the grid spacing, so spatial and attribute
    cluster structure coincide. ``region_labels`` records the planted cluster
    of each unit. Identical arguments give a byte-identical dataset.
    """
    if n < 2 or p < 1 or not (1 <= n_clusters <= n):
        raise ValidationError("need n >= 2, p >= 1, 1 <= n_clusters <= n")
    rng = np.random.default_rng(seed)
    sizes = np.full(n_clusters, n // n_clusters)
    sizes[: n % n_clusters] += 1

    spacing = 10_000.0  # metres between cluster centers
    side = spacing / 16.0
    grid = int(np.ceil(np.sqrt(n_clusters)))
    centers = np.array(
        [(spacing * (c % grid), spacing * (c // grid)) for c in range(n_clusters)]
    )
    cluster_means = rng.normal(size=(n_clusters, p)) * separation

    unit_ids, regions, geoms, rows = [], [], [], []
    unit = 0
    for c in range(n_clusters):
        pos = centers[c] + rng.normal(scale=spacing / 8.0, size=(sizes[c], 2))
        attrs = cluster_means[c] + rng.normal(size=(sizes[c], p))
        for m in range(sizes[c]):
            unit_ids.append(f"synth-{unit:04d}")
            regions.append(f"blob-{c:02d}")
            x, y = pos[m]
            h = side / 2.0
            geoms.append(
                Polygon(np.array([[x - h, y - h], [x + h, y - h], [x + h, y + h], [x - h, y + h]]))
            )
            rows.append(attrs[m])
            unit += 1

    names = list(INDICATOR_NAMES) if p == len(INDICATOR_NAMES) else [
        f"x{j + 1:02d}" for j in range(p)
    ]
    geom_by_id = dict(zip(unit_ids, geoms))
    return _build_dataset(unit_ids, np.array(rows), names, geom_by_id, regions)
