"""Raw-data ingestion, discretization into binary features, splits, synthesis.

The binary feature space is built by binning numeric variables into
half-open intervals ``[low, high)`` and grouping categorical values, then
one-hot encoding. Missing raw values leave the whole one-hot group at zero,
so rules simply do not trigger on them.

Feature names are generated from the bins and are the stable contract
between datasets, discretizers and rule models:

    cscore<706      cscore in [640,706)      dti>=43
    purpose=C       purpose in [U,P]         state=area1
"""

from __future__ import annotations

import csv
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal as Lit, Sequence

import numpy as np

from .errors import DataError, DomainError, SizeError, StructuralError

ColumnKind = Lit["numeric", "categorical"]


def _fmt_num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if float(x) == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


# -- raw datasets -------------------------------------------------------------


@dataclass
class RawDataset:
    """Column-major typed table. Numeric columns use NaN for missing values,
    categorical columns use None."""

    columns: dict[str, np.ndarray]
    kinds: dict[str, ColumnKind]
    target_name: str | None
    record_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise StructuralError(f"ragged columns: {lengths}")
        if self.target_name is not None and self.target_name not in self.columns:
            raise StructuralError(f"target column {self.target_name!r} not present")
        if len(self.record_ids) != self.row_count:
            raise StructuralError("record_ids length does not match row count")

    @property
    def row_count(self) -> int:
        if not self.columns:
            return len(self.record_ids)
        return len(next(iter(self.columns.values())))

    def target(self) -> np.ndarray:
        if self.target_name is None:
            raise StructuralError("dataset has no target column")
        return np.asarray(self.columns[self.target_name], dtype=np.float64)

    def select(self, indices: Sequence[int]) -> "RawDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return RawDataset(
            columns={n: c[idx] for n, c in self.columns.items()},
            kinds=dict(self.kinds),
            target_name=self.target_name,
            record_ids=tuple(self.record_ids[i] for i in idx),
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.columns):
            h.update(name.encode())
            h.update(np.asarray(self.columns[name]).astype(str).tobytes())
        h.update("|".join(self.record_ids).encode())
        return h.hexdigest()


def concat_raw(a: RawDataset, b: RawDataset) -> RawDataset:
    """Equal-weight row concatenation; schemas must agree."""
    if set(a.columns) != set(b.columns) or a.kinds != b.kinds:
        raise StructuralError("cannot concatenate datasets with different schemas")
    if a.target_name != b.target_name:
        raise StructuralError("cannot concatenate datasets with different targets")
    return RawDataset(
        columns={n: np.concatenate([a.columns[n], b.columns[n]]) for n in a.columns},
        kinds=dict(a.kinds),
        target_name=a.target_name,
        record_ids=a.record_ids + b.record_ids,
    )


def load_csv(
    path: str | Path,
    schema: dict[str, str],
    target_name: str,
    id_column: str | None = None,
) -> RawDataset:
    """Read a comma-separated UTF-8 file with a header row.

    ``schema`` maps column names to ``numeric`` or ``categorical``. Empty
    cells become missing values; unparseable cells are collected into a
    row-level error report (raised as :class:`DataError` with line numbers).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    if target_name not in schema:
        raise DataError(f"target column {target_name!r} must appear in the schema")
    raw: dict[str, list] = {name: [] for name in schema}
    ids: list[str] = []
    errors: list[tuple[int, str, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing_cols = [c for c in schema if c not in header]
        if missing_cols:
            raise DataError(f"header of {path} lacks schema columns {missing_cols}")
        if id_column is not None and id_column not in header:
            raise DataError(f"header of {path} lacks id column {id_column!r}")
        for line_no, row in enumerate(reader, start=2):
            for name, kind in schema.items():
                cell = (row.get(name) or "").strip()
                if kind == "numeric":
                    if cell == "":
                        if name == target_name:
                            if len(errors) < 50:
                                errors.append((line_no, name, "missing target value"))
                        raw[name].append(math.nan)
                    else:
                        try:
                            raw[name].append(float(cell))
                        except ValueError:
                            if len(errors) < 50:
                                errors.append((line_no, name, f"not numeric: {cell!r}"))
                            raw[name].append(math.nan)
                elif kind == "categorical":
                    raw[name].append(cell if cell != "" else None)
                else:
                    raise DataError(f"unknown column kind {kind!r} for {name!r}")
            ids.append(str(row[id_column]) if id_column else str(line_no - 2))
    if errors:
        raise DataError(f"{path} contains unparseable cells", errors)
    columns: dict[str, np.ndarray] = {}
    kinds: dict[str, ColumnKind] = {}
    for name, kind in schema.items():
        if kind == "numeric":
            columns[name] = np.asarray(raw[name], dtype=np.float64)
            kinds[name] = "numeric"
        else:
            columns[name] = np.asarray(raw[name], dtype=object)
            kinds[name] = "categorical"
    return RawDataset(columns, kinds, target_name, tuple(ids))


def write_csv(data: RawDataset, path: str | Path, id_column: str = "record_id") -> None:
    """Deterministic CSV writer (floats via repr, missing as empty cells)."""
    names = list(data.columns)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([id_column] + names)
        for i in range(data.row_count):
            row = [data.record_ids[i]]
            for name in names:
                v = data.columns[name][i]
                if data.kinds[name] == "numeric":
                    row.append("" if (isinstance(v, float) and math.isnan(v)) else _fmt_num(float(v)))
                else:
                    row.append("" if v is None else str(v))
            writer.writerow(row)


# -- discretization -----------------------------------------------------------


@dataclass(frozen=True)
class NumericBinning:
    """Half-open bins [edge_i, edge_{i+1}) over one numeric variable.

    Edges include the +-inf endpoints unless the binning is ``bounded``, in
    which case out-of-range values clamp into the edge bins (and are counted
    in the transform report).
    """

    variable: str
    edges: tuple[float, ...]
    bounded: bool = False

    def __post_init__(self) -> None:
        if len(self.edges) < 2:
            raise StructuralError(f"{self.variable}: need at least two bin edges")
        for lo, hi in zip(self.edges, self.edges[1:]):
            if not lo < hi:
                raise StructuralError(f"{self.variable}: bin edges must be strictly increasing")

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = []
        for lo, hi in zip(self.edges, self.edges[1:]):
            if math.isinf(lo) and math.isinf(hi):
                names.append(f"{self.variable}=any")
            elif math.isinf(lo):
                names.append(f"{self.variable}<{_fmt_num(hi)}")
            elif math.isinf(hi):
                names.append(f"{self.variable}>={_fmt_num(lo)}")
            else:
                names.append(f"{self.variable} in [{_fmt_num(lo)},{_fmt_num(hi)})")
        return tuple(names)

    def assign(self, values: np.ndarray) -> tuple[np.ndarray, int]:
        """Bin index per value (-1 for missing), plus count of clamped values."""
        v = np.asarray(values, dtype=np.float64)
        missing = np.isnan(v)
        edges = np.asarray(self.edges, dtype=np.float64)
        idx = np.searchsorted(edges, v, side="right") - 1
        clamped = 0
        if self.bounded:
            below = (idx < 0) & ~missing
            above = (idx >= len(edges) - 1) & ~missing
            clamped = int(below.sum() + above.sum())
            idx = np.clip(idx, 0, len(edges) - 2)
        else:
            # unbounded edges are +-inf, so every finite value lands in a bin
            idx = np.clip(idx, 0, len(edges) - 2)
        idx = np.where(missing, -1, idx)
        return idx.astype(np.intp), clamped


@dataclass(frozen=True)
class CategoryGrouping:
    """Disjoint value groups over one categorical variable.

    ``open_other`` routes values outside every group into the group named
    ``other`` at transform time (used by frequency pooling); otherwise
    unmatched values set no bit and are counted in the transform report.
    """

    variable: str
    groups: tuple[tuple[str, tuple[str, ...]], ...]
    open_other: bool = False

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for _, values in self.groups:
            for v in values:
                if v in seen:
                    raise StructuralError(f"{self.variable}: value {v!r} in multiple groups")
                seen.add(v)
        if self.open_other and "other" not in {name for name, _ in self.groups}:
            raise StructuralError(f"{self.variable}: open_other requires a group named 'other'")

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = []
        for name, values in self.groups:
            if name is not None and name != "":
                names.append(f"{self.variable}={name}")
            elif len(values) == 1:
                names.append(f"{self.variable}={values[0]}")
            else:
                names.append(f"{self.variable} in [{','.join(values)}]")
        return tuple(names)

    def assign(self, values: np.ndarray) -> tuple[np.ndarray, int]:
        lookup: dict[str, int] = {}
        other_idx = -1
        for gi, (name, vals) in enumerate(self.groups):
            if name == "other":
                other_idx = gi
            for v in vals:
                lookup[v] = gi
        idx = np.empty(len(values), dtype=np.intp)
        unmatched = 0
        for i, v in enumerate(values):
            if v is None:
                idx[i] = -1
            elif str(v) in lookup:
                idx[i] = lookup[str(v)]
            elif self.open_other:
                idx[i] = other_idx
            else:
                unmatched += 1
                idx[i] = -1
        return idx, unmatched


@dataclass(frozen=True)
class DiscretizationSpec:
    """Ordered per-variable binnings defining the binary feature space."""

    entries: tuple[NumericBinning | CategoryGrouping, ...]

    @property
    def feature_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for e in self.entries:
            names.extend(e.feature_names)
        return tuple(names)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(e.variable for e in self.entries)

    def to_config_dict(self) -> dict:
        """Serialize as the same declarative config format ``fit_discretizer`` reads."""
        variables: dict[str, dict] = {}
        for e in self.entries:
            if isinstance(e, NumericBinning):
                if e.bounded:
                    variables[e.variable] = {"cuts": list(e.edges), "bounded": True}
                else:
                    variables[e.variable] = {"cuts": [c for c in e.edges if math.isfinite(c)]}
            else:
                names = [name for name, _ in e.groups]
                if all(names) and len(set(names)) == len(names):
                    groups: dict | list = {name: list(vals) for name, vals in e.groups}
                else:
                    groups = [{"name": name, "values": list(vals)} for name, vals in e.groups]
                entry: dict = {"groups": groups}
                if e.open_other:
                    entry["open_other"] = True
                variables[e.variable] = entry
        return {"variables": variables}


@dataclass
class TransformReport:
    clamped: dict[str, int] = field(default_factory=dict)
    unmatched: dict[str, int] = field(default_factory=dict)


@dataclass
class BinaryDataset:
    """Row-major binary matrix plus target and feature metadata.

    ``feature_groups`` records the raw variable behind each feature so that
    rule mining can respect per-variable budgets.
    """

    records: np.ndarray
    feature_names: tuple[str, ...]
    target: np.ndarray | None
    record_ids: tuple[str, ...]
    feature_groups: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.records = np.asarray(self.records, dtype=np.uint8)
        if self.records.ndim != 2:
            raise StructuralError("records must be a 2-d matrix")
        if self.records.shape[1] != len(self.feature_names):
            raise StructuralError(
                f"matrix width {self.records.shape[1]} does not match "
                f"{len(self.feature_names)} feature names"
            )
        if not self.feature_groups:
            self.feature_groups = tuple(self.feature_names)
        if len(self.feature_groups) != len(self.feature_names):
            raise StructuralError("feature_groups must align with feature_names")
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=np.float64)
            if len(self.target) != self.records.shape[0]:
                raise StructuralError("target length does not match record count")
        if len(self.record_ids) != self.records.shape[0]:
            raise StructuralError("record_ids length does not match record count")

    @property
    def n_records(self) -> int:
        return self.records.shape[0]

    @property
    def target_is_binary(self) -> bool:
        if self.target is None:
            return False
        t = self.target[~np.isnan(self.target)]
        return bool(np.isin(t, (0.0, 1.0)).all())

    def matrix_for(self, feature_names: Sequence[str]) -> np.ndarray:
        index = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in feature_names if n not in index]
        if missing:
            raise StructuralError(f"dataset lacks features: {missing}")
        return self.records[:, [index[n] for n in feature_names]].astype(bool)

    def select(self, indices: Sequence[int]) -> "BinaryDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return BinaryDataset(
            records=self.records[idx],
            feature_names=self.feature_names,
            target=None if self.target is None else self.target[idx],
            record_ids=tuple(self.record_ids[i] for i in idx),
            feature_groups=self.feature_groups,
        )

    def with_target(self, values: np.ndarray) -> "BinaryDataset":
        return BinaryDataset(
            records=self.records,
            feature_names=self.feature_names,
            target=np.asarray(values, dtype=np.float64),
            record_ids=self.record_ids,
            feature_groups=self.feature_groups,
        )


def fit_discretizer(data: RawDataset, config: dict | None = None) -> DiscretizationSpec:
    """Fit bin edges and category groups from data plus a declarative config.

    Config keys per variable: ``{"cuts": [..], "bounded": bool}`` or
    ``{"bins": k}`` (quantile binning, the default with k=4) for numeric
    variables; ``{"groups": {...}}`` or ``{"min_share": f}`` (frequency
    pooling, default 0.01) for categorical ones. Variables missing from the
    config are binned with the defaults; the target column is skipped.
    """
    config = config or {}
    var_cfg: dict[str, dict] = dict(config.get("variables", {}))
    default_bins = int(config.get("default_bins", 4))
    default_min_share = float(config.get("default_min_share", 0.01))
    only_listed = bool(config.get("only_listed", False))

    entries: list[NumericBinning | CategoryGrouping] = []
    for name, kind in data.kinds.items():
        if name == data.target_name:
            continue
        cfg = var_cfg.get(name)
        if cfg is None and only_listed:
            continue
        cfg = cfg or {}
        if kind == "numeric":
            entries.append(_fit_numeric(name, data.columns[name], cfg, default_bins))
        else:
            entries.append(_fit_categorical(name, data.columns[name], cfg, default_min_share))
    unknown = [n for n in var_cfg if n not in data.columns]
    if unknown:
        raise StructuralError(f"config references unknown variables: {unknown}")
    return DiscretizationSpec(tuple(entries))


def _fit_numeric(name: str, values: np.ndarray, cfg: dict, default_bins: int) -> NumericBinning:
    strategy = cfg.get("strategy")
    if strategy is not None and strategy not in ("quantile", "explicit"):
        raise StructuralError(f"{name}: unknown strategy {strategy!r}")
    if strategy == "explicit" and "cuts" not in cfg:
        raise StructuralError(f"{name}: explicit strategy requires cuts")
    if "cuts" in cfg:
        cuts = [float(c) for c in cfg["cuts"]]
        if cuts != sorted(set(cuts)):
            raise StructuralError(f"{name}: explicit cuts must be strictly increasing")
        if cfg.get("bounded"):
            if len(cuts) < 2:
                raise StructuralError(f"{name}: bounded binning needs at least two cuts")
            return NumericBinning(name, tuple(cuts), bounded=True)
        return NumericBinning(name, (-math.inf, *cuts, math.inf))
    finite = values[~np.isnan(np.asarray(values, dtype=np.float64))]
    bins = int(cfg.get("bins", default_bins))
    if finite.size == 0 or np.unique(finite).size < 2:
        warnings.warn(f"{name}: constant numeric column, using a single pass-through bin")
        return NumericBinning(name, (-math.inf, math.inf))
    qs = np.quantile(finite, [i / bins for i in range(1, bins)])
    cuts = sorted(set(float(q) for q in qs))
    cuts = [c for c in cuts if finite.min() < c]  # drop degenerate leading cut
    if not cuts:
        warnings.warn(f"{name}: quantiles collapsed, using a single pass-through bin")
        return NumericBinning(name, (-math.inf, math.inf))
    return NumericBinning(name, (-math.inf, *cuts, math.inf))


def _fit_categorical(
    name: str, values: np.ndarray, cfg: dict, default_min_share: float
) -> CategoryGrouping:
    observed = [str(v) for v in values if v is not None]
    if "groups" in cfg:
        raw_groups = cfg["groups"]
        groups: list[tuple[str, tuple[str, ...]]] = []
        if isinstance(raw_groups, dict):
            for gname, vals in raw_groups.items():
                groups.append((str(gname), tuple(str(v) for v in vals)))
        else:
            for entry in raw_groups:
                if isinstance(entry, dict):
                    vals = [str(v) for v in entry["values"]]
                    groups.append((str(entry.get("name") or ""), tuple(vals)))
                else:
                    vals = [str(v) for v in entry]
                    groups.append(("" if len(vals) > 1 else vals[0], tuple(vals)))
        covered = {v for _, vals in groups for v in vals}
        leftovers = sorted(set(observed) - covered)
        open_other = bool(cfg.get("open_other", False))
        if leftovers:
            if "other" in {g for g, _ in groups}:
                raise StructuralError(f"{name}: leftover values {leftovers} but 'other' taken")
            groups.append(("other", tuple(leftovers)))
            open_other = True
        return CategoryGrouping(name, tuple(groups), open_other=open_other)
    # frequency pooling: common values get singleton groups, the rest pool
    min_share = float(cfg.get("min_share", default_min_share))
    counts: dict[str, int] = {}
    for v in observed:
        counts[v] = counts.get(v, 0) + 1
    total = max(len(observed), 1)
    frequent = [v for v, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])) if c / total >= min_share]
    rare = sorted(v for v in counts if v not in frequent)
    groups = [(v, (v,)) for v in frequent]
    if rare:
        groups.append(("other", tuple(rare)))
        return CategoryGrouping(name, tuple(groups), open_other=True)
    return CategoryGrouping(name, tuple(groups))


def transform_with_report(
    spec: DiscretizationSpec, data: RawDataset
) -> tuple[BinaryDataset, TransformReport]:
    """One-hot encode ``data`` into the spec's feature space.

    Missing raw values leave their one-hot group all-zero; clamped numeric
    values and unmatched categories are tallied in the report.
    """
    missing_vars = [v for v in spec.variables if v not in data.columns]
    if missing_vars:
        raise StructuralError(f"data lacks variables required by the spec: {missing_vars}")
    n = data.row_count
    blocks: list[np.ndarray] = []
    groups: list[str] = []
    report = TransformReport()
    for entry in spec.entries:
        values = data.columns[entry.variable]
        idx, oddity = entry.assign(values)
        width = len(entry.feature_names)
        block = np.zeros((n, width), dtype=np.uint8)
        valid = idx >= 0
        block[np.nonzero(valid)[0], idx[valid]] = 1
        blocks.append(block)
        groups.extend([entry.variable] * width)
        if oddity:
            if isinstance(entry, NumericBinning):
                report.clamped[entry.variable] = oddity
            else:
                report.unmatched[entry.variable] = oddity
    records = np.hstack(blocks) if blocks else np.zeros((n, 0), dtype=np.uint8)
    target = data.target() if data.target_name is not None else None
    binary = BinaryDataset(
        records=records,
        feature_names=spec.feature_names,
        target=target,
        record_ids=data.record_ids,
        feature_groups=tuple(groups),
    )
    return binary, report


def transform(spec: DiscretizationSpec, data: RawDataset) -> BinaryDataset:
    binary, _ = transform_with_report(spec, data)
    return binary


# -- splitting ----------------------------------------------------------------


def split_indices(record_ids: Sequence[str], test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic split keyed on record ids, not positions.

    Ids are ordered by a salted hash and the first ``floor(n * fraction)``
    become the test side, so the partition is exact, reproducible, and
    invariant to record order.
    """
    if not (0.0 < test_fraction < 1.0):
        raise DomainError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = len(record_ids)
    n_test = int(math.floor(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise SizeError(f"split of {n} rows at fraction {test_fraction} leaves an empty side")
    keyed = sorted(
        range(n),
        key=lambda i: (hashlib.sha256(f"{seed}:{record_ids[i]}".encode()).hexdigest(), record_ids[i]),
    )
    test = np.asarray(sorted(keyed[:n_test]), dtype=np.intp)
    train = np.asarray(sorted(keyed[n_test:]), dtype=np.intp)
    return train, test


def split(data: BinaryDataset, test_fraction: float, seed: int) -> tuple[BinaryDataset, BinaryDataset]:
    train_idx, test_idx = split_indices(data.record_ids, test_fraction, seed)
    return data.select(train_idx), data.select(test_idx)


def split_raw(data: RawDataset, test_fraction: float, seed: int) -> tuple[RawDataset, RawDataset]:
    train_idx, test_idx = split_indices(data.record_ids, test_fraction, seed)
    return data.select(train_idx), data.select(test_idx)


# -- synthetic two-regime generator -------------------------------------------


@dataclass(frozen=True)
class SyntheticVariable:
    """One raw variable of the generator: a clipped normal or a categorical."""

    name: str
    kind: ColumnKind
    mean: float = 0.0
    sd: float = 1.0
    lo: float = -math.inf
    hi: float = math.inf
    cuts: tuple[float, ...] = ()
    levels: tuple[tuple[str, float], ...] = ()

    def binning(self) -> NumericBinning | CategoryGrouping:
        if self.kind == "numeric":
            return NumericBinning(self.name, (-math.inf, *self.cuts, math.inf))
        return CategoryGrouping(self.name, tuple((lvl, (lvl,)) for lvl, _ in self.levels))


@dataclass(frozen=True)
class SyntheticConfig:
    """Two-regime generator configuration.

    ``coef_regime1``/``coef_regime2`` map binary feature names (as produced
    by each variable's binning) to default log-odds contributions, plus the
    special key ``intercept``. Regime 2 additionally rejects applicants
    whose creditworthiness score (negative regime-1 attribute log-odds plus
    noise) falls below ``acceptance_threshold``.
    """

    n_regime1: int
    n_regime2: int
    seed: int
    variables: tuple[SyntheticVariable, ...]
    coef_regime1: dict[str, float]
    coef_regime2: dict[str, float]
    acceptance_threshold: float | None = None
    acceptance_noise_sd: float = 1.0
    target_name: str = "default"

    def __post_init__(self) -> None:
        if self.n_regime1 <= 0 or self.n_regime2 <= 0:
            raise DomainError("record counts must be positive")

    def truth_spec(self) -> DiscretizationSpec:
        return DiscretizationSpec(tuple(v.binning() for v in self.variables))


def _sample_raw(rng: np.random.Generator, variables: tuple[SyntheticVariable, ...], n: int) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for v in variables:
        if v.kind == "numeric":
            x = rng.normal(v.mean, v.sd, size=n)
            cols[v.name] = np.clip(x, v.lo, v.hi)
        else:
            names = [lvl for lvl, _ in v.levels]
            probs = np.asarray([p for _, p in v.levels], dtype=np.float64)
            probs = probs / probs.sum()
            picks = rng.choice(len(names), size=n, p=probs)
            cols[v.name] = np.asarray([names[i] for i in picks], dtype=object)
    return cols


def _coef_vector(coefs: dict[str, float], feature_names: tuple[str, ...]) -> tuple[np.ndarray, float]:
    unknown = [k for k in coefs if k != "intercept" and k not in feature_names]
    if unknown:
        raise StructuralError(f"coefficients reference unknown features: {unknown}")
    beta = np.asarray([float(coefs.get(f, 0.0)) for f in feature_names], dtype=np.float64)
    return beta, float(coefs.get("intercept", 0.0))


def generate_synthetic(config: SyntheticConfig) -> tuple[RawDataset, RawDataset, dict]:
    """Draw the two regimes and return them with the generating truth.

    Regime 1 samples a ground-truth logistic model over the binned features;
    regime 2 shifts the coefficients (concept drift) and, when an acceptance
    threshold is set, keeps only applicants whose noisy creditworthiness
    score clears it (population drift). Identical config and seed give
    byte-identical datasets.
    """
    rng = np.random.default_rng(config.seed)
    spec = config.truth_spec()
    feature_names = spec.feature_names
    beta1, b0_1 = _coef_vector(config.coef_regime1, feature_names)
    beta2, b0_2 = _coef_vector(config.coef_regime2, feature_names)

    def make_regime(n: int, beta: np.ndarray, b0: float, prefix: str, filtered: bool) -> RawDataset:
        kept: list[dict[str, np.ndarray]] = []
        kept_logits: list[np.ndarray] = []
        total = 0
        drawn = 0
        while total < n:
            chunk = max(n - total, 1024)
            cols = _sample_raw(rng, config.variables, chunk)
            drawn += chunk
            raw = RawDataset(
                columns=cols,
                kinds={v.name: v.kind for v in config.variables},
                target_name=None,
                record_ids=tuple(str(i) for i in range(chunk)),
            )
            X = transform(spec, raw).records.astype(np.float64)
            logit = b0 + X @ beta
            if filtered:
                worthiness = -(X @ beta1) + rng.normal(0.0, config.acceptance_noise_sd, size=chunk)
                accept = worthiness >= config.acceptance_threshold
            else:
                accept = np.ones(chunk, dtype=bool)
            if filtered and drawn >= 50 * n and total + int(accept.sum()) < max(n // 100, 1):
                raise SizeError("acceptance threshold rejects essentially all applicants")
            kept.append({k: v[accept] for k, v in cols.items()})
            kept_logits.append(logit[accept])
            total += int(accept.sum())
            if drawn > 200 * n:
                raise SizeError("acceptance threshold rejects essentially all applicants")
        cols = {
            k: np.concatenate([c[k] for c in kept])[:n] for k in kept[0]
        }
        logits = np.concatenate(kept_logits)[:n]
        p = 1.0 / (1.0 + np.exp(-logits))
        y = (rng.random(n) < p).astype(np.float64)
        cols[config.target_name] = y
        kinds: dict[str, ColumnKind] = {v.name: v.kind for v in config.variables}
        kinds[config.target_name] = "numeric"
        ids = tuple(f"{prefix}-{i:06d}" for i in range(n))
        return RawDataset(cols, kinds, config.target_name, ids)

    regime1 = make_regime(config.n_regime1, beta1, b0_1, "r1", filtered=False)
    regime2 = make_regime(
        config.n_regime2, beta2, b0_2, "r2", filtered=config.acceptance_threshold is not None
    )
    truth = {
        "feature_names": list(feature_names),
        "regime1": dict(config.coef_regime1),
        "regime2": dict(config.coef_regime2),
        "acceptance_threshold": config.acceptance_threshold,
        "acceptance_noise_sd": config.acceptance_noise_sd,
    }
    return regime1, regime2, truth


def default_two_regime_config(
    n_regime1: int = 50_000, n_regime2: int = 50_000, seed: int = 20080915
) -> SyntheticConfig:
    """Desk-scale stand-in for the pre/post-crisis mortgage experiment.

    Regime 2 deepens the risk of low credit scores, high rates and high DTI
    while cutting the base rate and screening out weak applicants, so both
    drift forces are present and a correction layer has real signal to find.
    """
    variables = (
        SyntheticVariable("cscore", "numeric", mean=706, sd=58, lo=520, hi=840, cuts=(640, 706, 760)),
        SyntheticVariable("dti", "numeric", mean=35, sd=9, lo=10, hi=64, cuts=(43,)),
        SyntheticVariable("orig_rate", "numeric", mean=6.1, sd=0.9, lo=3.5, hi=9.5, cuts=(5.25, 6.0)),
        SyntheticVariable("ltv", "numeric", mean=74, sd=13, lo=25, hi=99, cuts=(55, 80)),
        SyntheticVariable(
            "num_bo", "categorical", levels=(("1", 0.45), ("2", 0.55))
        ),
        SyntheticVariable(
            "prop_type",
            "categorical",
            levels=(("SF", 0.62), ("CO", 0.14), ("PU", 0.14), ("MH", 0.10)),
        ),
    )
    coef1 = {
        "intercept": -3.9,
        "cscore<640": 1.4,
        "cscore in [640,706)": 0.8,
        "cscore in [706,760)": 0.3,
        "dti>=43": 0.3,
        "orig_rate>=6": 0.3,
        "orig_rate in [5.25,6)": 0.1,
        "ltv>=80": 0.9,
        "ltv<55": -0.5,
        "num_bo=1": 0.1,
        "prop_type=SF": 0.05,
        "prop_type=MH": 1.2,
    }
    # post-crisis regime reorders the risk drivers, not just their scale:
    # rates and DTI surge, high LTV loses its edge, single borrowers and
    # single-family homes deteriorate, and the base rate collapses
    coef2 = dict(coef1)
    coef2.update(
        {
            "intercept": -6.1,
            "cscore<640": 2.6,
            "cscore in [640,706)": 1.7,
            "cscore in [706,760)": 0.4,
            "dti>=43": 1.3,
            "orig_rate>=6": 1.5,
            "orig_rate in [5.25,6)": 0.8,
            "ltv>=80": 0.3,
            "ltv<55": -1.0,
            "num_bo=1": 0.7,
            "prop_type=SF": 0.5,
            "prop_type=MH": 0.6,
        }
    )
    return SyntheticConfig(
        n_regime1=n_regime1,
        n_regime2=n_regime2,
        seed=seed,
        variables=variables,
        coef_regime1=coef1,
        coef_regime2=coef2,
        acceptance_threshold=-1.1,
        acceptance_noise_sd=1.0,
    )
