"""Evaluation and diagnostics for base models and correction pipelines.

Covers ranking performance (AUC, learning curves over rule count),
band-level calibration against observed rates, raw group-rate comparisons
between periods, impact-sorted rule tables, and frequent rule combinations
("rules clusters") with a calibration-gap quality check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .calibrate import CalibrationConfig, calibrate
from .correction import (
    BaseScorer,
    CorrectionPipeline,
    apply_corrected,
    build_correction,
    score_base,
)
from .data import BinaryDataset, RawDataset, split_indices, transform
from .errors import DomainError, StructuralError
from .mining import MiningConfig, prefix_model
from .model import RuleModel, _sigmoid


def auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Probability that a random positive outranks a random negative.

    Rank-statistic form with ties counted one half; O(n log n).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape or s.ndim != 1:
        raise StructuralError("scores and labels must be 1-d vectors of equal length")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DomainError("AUC is undefined when only one class is present")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty_like(s)
    sorted_s = s[order]
    # average ranks across tied score runs
    i = 0
    n = len(s)
    while i < n:
        j = i
        while j + 1 < n and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


# -- band-level calibration ----------------------------------------------------


@dataclass
class BandRow:
    band: str
    lo: float | None
    hi: float | None
    count: int
    observed_rate: float | None
    mean_m1: float | None
    mean_m2: float | None
    mean_combined: float | None

    def to_dict(self) -> dict:
        return {
            "band": self.band,
            "lo": self.lo,
            "hi": self.hi,
            "count": self.count,
            "observed_rate": self.observed_rate,
            "mean_m1": self.mean_m1,
            "mean_m2": self.mean_m2,
            "mean_combined": self.mean_combined,
        }


@dataclass
class BandReport:
    variable: str
    cuts: tuple[float, ...]
    rows: list[BandRow]

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "cuts": list(self.cuts),
            "rows": [r.to_dict() for r in self.rows],
        }


def band_masks(
    data: RawDataset, variable: str, cuts: Sequence[float]
) -> list[tuple[str, float | None, float | None, np.ndarray]]:
    """Half-open band membership masks over one raw numeric variable.

    Records with a missing band variable go into a trailing ``missing`` band
    so every scored record is covered.
    """
    if variable not in data.columns:
        raise StructuralError(f"no such variable: {variable!r}")
    cuts = [float(c) for c in cuts]
    if cuts != sorted(set(cuts)):
        raise StructuralError("band cuts must be strictly increasing")
    values = np.asarray(data.columns[variable], dtype=np.float64)
    edges = [-math.inf, *cuts, math.inf]
    out: list[tuple[str, float | None, float | None, np.ndarray]] = []
    for lo, hi in zip(edges, edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            label = f"{variable}=any"
        elif math.isinf(lo):
            label = f"{variable}<{hi:g}"
        elif math.isinf(hi):
            label = f"{variable}>={lo:g}"
        else:
            label = f"{variable} in [{lo:g},{hi:g})"
        mask = (values >= lo) & (values < hi)
        out.append((label, None if math.isinf(lo) else lo, None if math.isinf(hi) else hi, mask))
    missing = np.isnan(values)
    if missing.any():
        out.append((f"{variable} missing", None, None, missing))
    return out


def band_report(
    pipeline: CorrectionPipeline,
    data: RawDataset,
    band_variable: str,
    cuts: Sequence[float],
) -> BandReport:
    """Observed vs predicted target rates per band, for M1, M2 and M1+C."""
    scored = apply_corrected(pipeline, data)
    p1 = _sigmoid(scored.m1_logodds)
    p2 = _sigmoid(score_base(pipeline.m2, data))
    pc = scored.combined_probability
    y = data.target() if data.target_name is not None else None
    rows = []
    for label, lo, hi, mask in band_masks(data, band_variable, cuts):
        count = int(mask.sum())
        if count == 0:
            rows.append(BandRow(label, lo, hi, 0, None, None, None, None))
            continue
        rows.append(
            BandRow(
                band=label,
                lo=lo,
                hi=hi,
                count=count,
                observed_rate=float(y[mask].mean()) if y is not None else None,
                mean_m1=float(p1[mask].mean()),
                mean_m2=float(p2[mask].mean()),
                mean_combined=float(pc[mask].mean()),
            )
        )
    return BandReport(band_variable, tuple(float(c) for c in cuts), rows)


# -- group rates ----------------------------------------------------------------


def parse_predicate(text: str) -> Callable[[RawDataset], np.ndarray]:
    """Parse a small predicate language over raw variables.

    Supported atoms: ``all``, ``var<x``, ``var<=x``, ``var>x``, ``var>=x``,
    ``var==value``, ``var in [a,b,...]``; atoms joined with ``&``.
    """
    atoms = [a.strip() for a in text.split("&")]

    def compile_atom(atom: str) -> Callable[[RawDataset], np.ndarray]:
        if atom == "all":
            return lambda d: np.ones(d.row_count, dtype=bool)
        if " in [" in atom and atom.endswith("]"):
            var, rest = atom.split(" in [", 1)
            values = [v.strip() for v in rest[:-1].split(",")]
            var = var.strip()
            return lambda d: np.isin(
                np.asarray([None if v is None else str(v) for v in d.columns[var]], dtype=object),
                values,
            )
        for op in ("<=", ">=", "==", "<", ">"):
            if op in atom:
                var, val = atom.split(op, 1)
                var = var.strip()
                val = val.strip()
                if op == "==":
                    return lambda d: np.asarray(
                        [v is not None and str(v) == val for v in d.columns[var]], dtype=bool
                    )
                x = float(val)
                ops = {
                    "<": lambda col: col < x,
                    "<=": lambda col: col <= x,
                    ">": lambda col: col > x,
                    ">=": lambda col: col >= x,
                }
                fn = ops[op]
                return lambda d: np.nan_to_num(
                    fn(np.asarray(d.columns[var], dtype=np.float64)), nan=False
                ).astype(bool)
        raise DomainError(f"cannot parse predicate atom: {atom!r}")

    compiled = [compile_atom(a) for a in atoms]

    def run(d: RawDataset) -> np.ndarray:
        mask = np.ones(d.row_count, dtype=bool)
        for fn in compiled:
            mask &= fn(d)
        return mask

    return run


@dataclass
class GroupRates:
    rate_1: float | None
    count_1: int
    rate_2: float | None
    count_2: int

    def to_dict(self) -> dict:
        return {
            "rate_1": self.rate_1,
            "count_1": self.count_1,
            "rate_2": self.rate_2,
            "count_2": self.count_2,
        }


def group_rates(
    data_1: RawDataset,
    data_2: RawDataset,
    predicate: str | Callable[[RawDataset], np.ndarray],
) -> GroupRates:
    """Observed target rates within a predicate-selected group, per period."""
    fn = parse_predicate(predicate) if isinstance(predicate, str) else predicate

    def one(d: RawDataset) -> tuple[float | None, int]:
        mask = np.asarray(fn(d), dtype=bool)
        count = int(mask.sum())
        if count == 0:
            return None, 0
        return float(d.target()[mask].mean()), count

    r1, c1 = one(data_1)
    r2, c2 = one(data_2)
    return GroupRates(r1, c1, r2, c2)


# -- rule impact ----------------------------------------------------------------


@dataclass
class ImpactRow:
    rule_id: str
    label: str
    points: float
    coverage: float
    impact: float

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "label": self.label,
            "points": self.points,
            "coverage": self.coverage,
            "impact": self.impact,
        }


def impact_table(model: RuleModel, data: BinaryDataset) -> list[ImpactRow]:
    """Rules sorted by impact = |points| * coverage, intercept pinned last."""
    records = data.matrix_for(model.feature_names)
    trig = model.trigger_matrix(records)
    rows = []
    intercept_row = None
    for j, rule in enumerate(model.rules):
        coverage = float(trig[:, j].mean()) if data.n_records else 0.0
        points = rule.points(model.scale_a)
        row = ImpactRow(rule.id, rule.label, points, coverage, abs(points) * coverage)
        if rule.is_intercept:
            intercept_row = row
        else:
            rows.append(row)
    rows.sort(key=lambda r: (-r.impact, -r.coverage, r.rule_id))
    assert intercept_row is not None
    rows.append(intercept_row)
    return rows


# -- rules clusters ---------------------------------------------------------------


@dataclass
class RuleCombo:
    rule_ids: tuple[str, ...]
    support: float
    predicted_rate: float
    observed_rate: float
    gap: float

    def to_dict(self) -> dict:
        return {
            "rule_ids": list(self.rule_ids),
            "support": self.support,
            "predicted_rate": self.predicted_rate,
            "observed_rate": self.observed_rate,
            "gap": self.gap,
        }


def frequent_rule_combos(
    model: RuleModel,
    data: BinaryDataset,
    min_support: float,
    max_size: int = 2,
    probabilities: np.ndarray | None = None,
) -> list[RuleCombo]:
    """Levelwise enumeration of rule sets that co-trigger often enough.

    Returns combos of 2..max_size non-intercept rules with joint trigger
    support at or above ``min_support``, each with the mean predicted
    probability (from ``probabilities`` or the model itself) and the mean
    observed target within the triggering population.
    """
    if not (2 <= max_size <= 4):
        raise DomainError(f"max_size must lie in 2..4, got {max_size}")
    if not (0.0 < min_support <= 1.0):
        raise DomainError(f"min_support must lie in (0, 1], got {min_support}")
    if data.target is None:
        raise StructuralError("combo quality needs an observed target")
    records = data.matrix_for(model.feature_names)
    trig = model.trigger_matrix(records)
    y = np.asarray(data.target, dtype=np.float64)
    if probabilities is None:
        p = np.asarray(model.predict_proba(records), dtype=np.float64)
    else:
        p = np.asarray(probabilities, dtype=np.float64)
        if p.shape[0] != data.n_records:
            raise StructuralError("probabilities must align with the dataset")
    n = data.n_records
    rule_ids = [r.id for r in model.rules if not r.is_intercept]
    cols = {r.id: trig[:, j] for j, r in enumerate(model.rules) if not r.is_intercept}

    # level 1 seeds the apriori frontier but is not reported
    frontier: dict[tuple[str, ...], np.ndarray] = {}
    for rid in rule_ids:
        mask = cols[rid]
        if mask.sum() / n >= min_support:
            frontier[(rid,)] = mask
    singles = list(frontier)
    out: list[RuleCombo] = []
    size = 2
    while frontier and size <= max_size:
        next_frontier: dict[tuple[str, ...], np.ndarray] = {}
        keyset = set(frontier)
        seen: set[tuple[str, ...]] = set()
        for prev, (single,) in ((k, s) for k in sorted(frontier) for s in singles):
            if single in prev:
                continue
            combo = tuple(sorted(set(prev) | {single}, key=rule_ids.index))
            if combo in seen:
                continue
            seen.add(combo)
            # downward closure: every (size-1)-subset must be frequent
            if any(tuple(s) not in keyset for s in combinations(combo, size - 1)):
                continue
            mask = frontier[prev] & cols[single]
            support = float(mask.sum()) / n
            if support < min_support:
                continue
            next_frontier[combo] = mask
            out.append(
                RuleCombo(
                    rule_ids=combo,
                    support=support,
                    predicted_rate=float(p[mask].mean()),
                    observed_rate=float(y[mask].mean()),
                    gap=float(abs(p[mask].mean() - y[mask].mean())),
                )
            )
        frontier = next_frontier
        size += 1
    out.sort(key=lambda c: (len(c.rule_ids), -c.support, c.rule_ids))
    return out


@dataclass
class ClusterQuality:
    rule_ids: tuple[str, ...]
    predicted_rate: float
    observed_rate: float
    gap: float
    suggestion: str | None

    def to_dict(self) -> dict:
        return {
            "rule_ids": list(self.rule_ids),
            "predicted_rate": self.predicted_rate,
            "observed_rate": self.observed_rate,
            "gap": self.gap,
            "suggestion": self.suggestion,
        }


def cluster_quality(
    combo: RuleCombo,
    pipeline: CorrectionPipeline,
    data: RawDataset,
    gap_threshold: float = 0.005,
) -> ClusterQuality:
    """Compare the cluster's combined-model prediction with its observed rate.

    When the gap exceeds the threshold, suggest the single extra rule whose
    addition to the cluster most reduces the within-cluster gap.
    """
    binary = transform(pipeline.discretizer, data)
    records = binary.matrix_for(pipeline.correction.feature_names)
    trig = pipeline.correction.trigger_matrix(records)
    probs = apply_corrected(pipeline, data).combined_probability
    y = data.target()
    by_id = {r.id: j for j, r in enumerate(pipeline.correction.rules)}
    unknown = [rid for rid in combo.rule_ids if rid not in by_id]
    if unknown:
        raise StructuralError(f"combo references unknown rules: {unknown}")
    mask = np.ones(data.row_count, dtype=bool)
    for rid in combo.rule_ids:
        mask &= trig[:, by_id[rid]]
    if not mask.any():
        raise DomainError("combo triggers no records in this dataset")
    predicted = float(probs[mask].mean())
    observed = float(y[mask].mean())
    gap = abs(predicted - observed)
    suggestion = None
    if gap > gap_threshold:
        best: tuple[float, float, str] | None = None
        for rule in pipeline.correction.rules:
            if rule.is_intercept or rule.id in combo.rule_ids:
                continue
            sub = mask & trig[:, by_id[rule.id]]
            count = int(sub.sum())
            if count == 0:
                continue
            sub_gap = abs(float(probs[sub].mean()) - float(y[sub].mean()))
            key = (sub_gap, -count / data.row_count, rule.id)
            if best is None or key < best:
                best = key
        # only worth suggesting when the refined sub-cluster actually fits better
        if best is not None and best[0] < gap:
            suggestion = best[2]
    return ClusterQuality(combo.rule_ids, predicted, observed, gap, suggestion)


# -- learning curve ---------------------------------------------------------------


def learning_curve(
    x1y1: RawDataset,
    x2y2: RawDataset,
    m1: BaseScorer,
    m2: BaseScorer,
    mining_config: MiningConfig,
    calib_config: CalibrationConfig,
    ks: Sequence[int],
    disc_config: dict | None = None,
    test_fraction: float = 0.2,
    split_seed: int = 13,
) -> list[dict]:
    """AUC of M1, M2 and M1+C on the held-out period-2 split, per rule count.

    Rules are mined once at the largest requested count; each row calibrates
    the ranked prefix of the first ``k`` rules plus the intercept.
    """
    ks = list(ks)
    if ks != sorted(ks):
        raise DomainError("ks must be sorted ascending")
    max_k = max(ks)
    if calib_config.mode != "regressor":
        calib_config = CalibrationConfig(
            mode="regressor",
            lam=calib_config.lam,
            max_iterations=calib_config.max_iterations,
            gradient_tolerance=calib_config.gradient_tolerance,
            memory=calib_config.memory,
            seed=calib_config.seed,
        )
    mining_full = MiningConfig(
        max_rules=max(max_k, 1),
        max_depth=mining_config.max_depth,
        min_support=mining_config.min_support,
        per_variable_cap=mining_config.per_variable_cap,
    )
    pipeline, _ = build_correction(
        x1y1,
        x2y2,
        m1,
        m2,
        mining_full,
        calib_config,
        disc_config,
        test_fraction=test_fraction,
        split_seed=split_seed,
    )
    train_idx, test_idx = split_indices(x2y2.record_ids, test_fraction, split_seed)
    x2_test = x2y2.select(test_idx)
    y_test = x2_test.target()
    s1_test = score_base(m1, x2_test)
    s2_test = score_base(m2, x2_test)
    auc_m1 = auc(s1_test, y_test)
    auc_m2 = auc(s2_test, y_test)

    s1_full = score_base(m1, x2y2)
    s2_full = score_base(m2, x2y2)
    z_points = -pipeline.correction.scale_a * (s2_full - s1_full)
    x2_binary = transform(pipeline.discretizer, x2y2).with_target(z_points)
    train = x2_binary.select(train_idx)
    test_records = transform(pipeline.discretizer, x2_test)

    # uncalibrated mined prefix comes from the pipeline's rule order
    mined_rules = pipeline.correction
    rows = []
    for k in ks:
        sub = prefix_model(mined_rules, k).with_mode("regressor")
        sub = sub.with_weights([0.5] * len(sub.rules))
        fitted, _ = calibrate(sub, train, calib_config)
        records = test_records.matrix_for(fitted.feature_names)
        c = -np.asarray(fitted.predict_value(records), dtype=np.float64) / fitted.scale_a
        rows.append(
            {
                "k": k,
                "auc_m1": auc_m1,
                "auc_m2": auc_m2,
                "auc_combined": auc(s1_test + c, y_test),
            }
        )
    return rows
