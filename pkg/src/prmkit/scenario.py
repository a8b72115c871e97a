"""What-if analysis over a correction pipeline.

A scenario is a named list of overrides on correction rules (set or scale
points, disable, or rewrite a premise) plus an optional crisis likelihood
``q``. Rescoring the portfolio under the overridden layer gives the
hypothetical regime; blending with the unmodified base model at weight ``q``
gives the stress-test expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analysis import band_masks
from .correction import CorrectionPipeline, apply_corrected, score_base
from .data import RawDataset
from .errors import DomainError, StructuralError, ValidationError
from .model import Literal, RuleModel, _sigmoid, weight_from_points

ACTIONS = ("set_points", "scale_points", "disable", "set_premise")


@dataclass(frozen=True)
class Override:
    rule_id: str
    action: str
    points: float | None = None
    factor: float | None = None
    premise: tuple[tuple[str, bool], ...] | None = None

    def to_dict(self) -> dict:
        doc: dict = {"rule_id": self.rule_id, "action": self.action}
        if self.action == "set_points":
            doc["points"] = self.points
        elif self.action == "scale_points":
            doc["factor"] = self.factor
        elif self.action == "set_premise":
            doc["premise"] = [{"feature": f, "expected": e} for f, e in self.premise or ()]
        return doc


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    overrides: tuple[Override, ...] = ()
    crisis_likelihood: float | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "overrides": [o.to_dict() for o in self.overrides],
            "crisis_likelihood": self.crisis_likelihood,
        }


def spec_from_dict(doc: dict) -> ScenarioSpec:
    """Validate and parse a scenario document; collects field-level errors."""
    errors: list[tuple[str, str]] = []
    if not isinstance(doc, dict):
        raise ValidationError([("", "scenario spec must be a JSON object")])
    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        errors.append(("name", "must be a string"))
    overrides: list[Override] = []
    raw_overrides = doc.get("overrides", [])
    if not isinstance(raw_overrides, list):
        errors.append(("overrides", "must be a list"))
        raw_overrides = []
    for i, od in enumerate(raw_overrides):
        path = f"overrides[{i}]"
        if not isinstance(od, dict):
            errors.append((path, "must be an object"))
            continue
        rule_id = od.get("rule_id")
        action = od.get("action")
        if not isinstance(rule_id, str) or not rule_id:
            errors.append((f"{path}.rule_id", "must be a non-empty string"))
            continue
        if action not in ACTIONS:
            errors.append((f"{path}.action", f"must be one of {ACTIONS}"))
            continue
        points = factor = None
        premise = None
        if action == "set_points":
            points = od.get("points")
            if not isinstance(points, (int, float)) or not math.isfinite(points):
                errors.append((f"{path}.points", "must be a finite number"))
                continue
            points = float(points)
        elif action == "scale_points":
            factor = od.get("factor")
            if not isinstance(factor, (int, float)) or not math.isfinite(factor):
                errors.append((f"{path}.factor", "must be a finite number"))
                continue
            factor = float(factor)
        elif action == "set_premise":
            raw_premise = od.get("premise")
            if not isinstance(raw_premise, list) or not raw_premise:
                errors.append((f"{path}.premise", "must be a non-empty list of literals"))
                continue
            lits = []
            ok = True
            for k, ld in enumerate(raw_premise):
                if not isinstance(ld, dict) or not isinstance(ld.get("feature"), str):
                    errors.append((f"{path}.premise[{k}]", "must be {feature, expected?}"))
                    ok = False
                    break
                lits.append((ld["feature"], bool(ld.get("expected", True))))
            if not ok:
                continue
            premise = tuple(lits)
        overrides.append(Override(rule_id, action, points, factor, premise))
    q = doc.get("crisis_likelihood")
    if q is not None:
        if not isinstance(q, (int, float)) or not (0.0 <= float(q) <= 1.0):
            errors.append(("crisis_likelihood", "must lie in [0, 1]"))
        else:
            q = float(q)
    if errors:
        raise ValidationError(errors)
    return ScenarioSpec(name=name, overrides=tuple(overrides), crisis_likelihood=q)


def apply_overrides(model: RuleModel, spec: ScenarioSpec) -> RuleModel:
    """Return a new model with the spec applied; the input is never mutated.

    Disabling a rule zeroes its points (weight 0.5) instead of deleting it,
    so rule ids stay stable for reports and the UI.
    """
    known = {r.id for r in model.rules}
    unknown = sorted({o.rule_id for o in spec.overrides} - known)
    if unknown:
        raise DomainError(f"overrides reference unknown rule ids: {unknown}; known: {sorted(known)}")
    findex = {n: i for i, n in enumerate(model.feature_names)}
    rules = {r.id: r for r in model.rules}
    for ov in spec.overrides:
        rule = rules[ov.rule_id]
        if ov.action == "disable":
            rules[ov.rule_id] = replace(rule, weight=0.5)
        elif ov.action == "set_points":
            assert ov.points is not None
            rules[ov.rule_id] = replace(
                rule, weight=weight_from_points(ov.points, model.scale_a)
            )
        elif ov.action == "scale_points":
            assert ov.factor is not None
            new_points = rule.points(model.scale_a) * ov.factor
            rules[ov.rule_id] = replace(
                rule, weight=weight_from_points(new_points, model.scale_a)
            )
        elif ov.action == "set_premise":
            assert ov.premise is not None
            bad = [f for f, _ in ov.premise if f not in findex]
            if bad:
                raise DomainError(
                    f"override on {ov.rule_id!r} references unknown features: {bad}"
                )
            lits = tuple(Literal(findex[f], e) for f, e in ov.premise)
            rules[ov.rule_id] = replace(rule, premise=lits)
        else:  # pragma: no cover - spec_from_dict rejects unknown actions
            raise DomainError(f"unknown action {ov.action!r}")
    return model.with_rules(rules[r.id] for r in model.rules)


def blend_likelihood(
    p_base: np.ndarray, p_scenario: np.ndarray, q: float
) -> np.ndarray:
    """Per-record expectation q * scenario + (1 - q) * base, in probability space."""
    pb = np.asarray(p_base, dtype=np.float64)
    ps = np.asarray(p_scenario, dtype=np.float64)
    if pb.shape != ps.shape:
        raise StructuralError(f"probability vectors disagree in shape: {pb.shape} vs {ps.shape}")
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"crisis likelihood must lie in [0, 1], got {q}")
    return q * ps + (1.0 - q) * pb


@dataclass
class ScenarioBandRow:
    band: str
    count: int
    observed: float | None
    base: float | None
    corrected: float | None
    scenario: float | None
    expected: float | None

    def to_dict(self) -> dict:
        return {
            "band": self.band,
            "count": self.count,
            "observed": self.observed,
            "base": self.base,
            "corrected": self.corrected,
            "scenario": self.scenario,
            "expected": self.expected,
        }


@dataclass
class ScenarioReport:
    name: str
    crisis_likelihood: float | None
    overall: ScenarioBandRow
    band_variable: str | None
    bands: list[ScenarioBandRow]
    rule_deltas: list[dict]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "crisis_likelihood": self.crisis_likelihood,
            "overall": self.overall.to_dict(),
            "band_variable": self.band_variable,
            "bands": [b.to_dict() for b in self.bands],
            "rule_deltas": self.rule_deltas,
        }


def scenario_report(
    pipeline: CorrectionPipeline,
    spec: ScenarioSpec,
    data: RawDataset,
    band_variable: str | None = None,
    band_cuts: tuple[float, ...] = (),
) -> ScenarioReport:
    """Score the portfolio under base, corrected and scenario layers.

    All rates are per-record probabilities averaged over the population (and
    per band when a band variable is given); the expected column blends the
    scenario against the bare base model at the crisis likelihood.
    """
    overridden = apply_overrides(pipeline.correction, spec)
    scenario_pipeline = CorrectionPipeline(
        m1=pipeline.m1,
        m2=pipeline.m2,
        correction=overridden,
        discretizer=pipeline.discretizer,
        z_space=pipeline.z_space,
        provenance=pipeline.provenance,
    )
    corrected = apply_corrected(pipeline, data)
    scenario_scores = apply_corrected(scenario_pipeline, data)
    p_base = _sigmoid(corrected.m1_logodds)
    p_corr = corrected.combined_probability
    p_scen = scenario_scores.combined_probability
    q = spec.crisis_likelihood
    p_exp = blend_likelihood(p_base, p_scen, q) if q is not None else None
    y = data.target() if data.target_name is not None else None

    def row(label: str, mask: np.ndarray) -> ScenarioBandRow:
        count = int(mask.sum())
        if count == 0:
            return ScenarioBandRow(label, 0, None, None, None, None, None)
        return ScenarioBandRow(
            band=label,
            count=count,
            observed=float(y[mask].mean()) if y is not None else None,
            base=float(p_base[mask].mean()),
            corrected=float(p_corr[mask].mean()),
            scenario=float(p_scen[mask].mean()),
            expected=float(p_exp[mask].mean()) if p_exp is not None else None,
        )

    everything = np.ones(data.row_count, dtype=bool)
    bands: list[ScenarioBandRow] = []
    if band_variable is not None:
        for label, _, _, mask in band_masks(data, band_variable, band_cuts):
            bands.append(row(label, mask))
    deltas = []
    for base_rule, scen_rule in zip(pipeline.correction.rules, overridden.rules):
        bp = base_rule.points(pipeline.correction.scale_a)
        sp = scen_rule.points(overridden.scale_a)
        deltas.append(
            {
                "rule_id": base_rule.id,
                "label": base_rule.label,
                "baseline_points": bp,
                "scenario_points": sp,
                "delta": sp - bp,
            }
        )
    return ScenarioReport(
        name=spec.name,
        crisis_likelihood=q,
        overall=row("all", everything),
        band_variable=band_variable,
        bands=bands,
        rule_deltas=deltas,
    )
