"""Probabilistic rule models over binary features.

A model is an ordered set of weighted association rules ``premise => target``
plus exactly one premise-free intercept rule. Each rule carries a weight
``psi`` in (0, 1); in scorecard style we also express weights as points

    p = -a * ln(psi / (1 - psi))

with a positive scaling factor ``a``. Positive points favour the good
outcome (target = 0), negative points favour the target event.

Rules whose premise holds on a record are said to *trigger*. Conditional
inference is exact and closed-form: the log-odds of the target given a
record is the sum of triggered rules' log-odds (intercept always included),
so the points score is

    S = p_0 + sum of triggered p_i      and      P(target=1) = sigmoid(-S/a).

:func:`brute_force_joint` enumerates the full joint distribution the same
rule set induces as a Markov random field (potential ``psi`` when a rule is
satisfied, ``1 - psi`` when falsified, normalised by ``Z``). It exists as a
test oracle: conditioning it on a record must reproduce the closed form.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Literal as Lit, Sequence

import numpy as np

from .errors import DomainError, ModeError, SizeError, StructuralError

Mode = Lit["classifier", "regressor"]

#: Weights are clamped this far away from {0, 1} to keep log-odds finite.
WEIGHT_CLAMP = 1e-9

#: Predicted probabilities are clamped here before taking logs.
PROBA_CLAMP = 1e-12


def points_from_weight(weight: float, scale_a: float = 1.0) -> float:
    """Convert a rule weight psi in (0, 1) to points ``-a*ln(psi/(1-psi))``.

    Strictly decreasing in ``weight``: weights above 0.5 give negative
    points (the rule pushes toward the target event).
    """
    w = float(weight)
    a = float(scale_a)
    if not math.isfinite(w) or not (0.0 < w < 1.0):
        raise DomainError(f"weight must lie in the open interval (0, 1), got {weight!r}")
    if not math.isfinite(a) or a <= 0.0:
        raise DomainError(f"scale_a must be a positive real, got {scale_a!r}")
    return -a * math.log(w / (1.0 - w))


def weight_from_points(points: float, scale_a: float = 1.0) -> float:
    """Exact inverse of :func:`points_from_weight`: ``1/(1 + exp(p/a))``."""
    p = float(points)
    a = float(scale_a)
    if not math.isfinite(p):
        raise DomainError(f"points must be finite, got {points!r}")
    if not math.isfinite(a) or a <= 0.0:
        raise DomainError(f"scale_a must be a positive real, got {scale_a!r}")
    x = p / a
    if x >= 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class Literal:
    """One premise condition: the record's bit at ``feature_index`` must equal ``expected``."""

    feature_index: int
    expected: bool = True

    def __post_init__(self) -> None:
        if self.feature_index < 0:
            raise StructuralError(f"feature_index must be non-negative, got {self.feature_index}")


@dataclass(frozen=True)
class Rule:
    """A weighted association rule; an empty premise makes it the intercept.

    Weights exactly at 0 or 1 are clamped into ``[1e-9, 1-1e-9]`` and the
    rule is flagged ``clamped`` (with a warning) so log-odds stay finite.
    """

    id: str
    premise: tuple[Literal, ...] = ()
    weight: float = 0.5
    label: str = ""
    mined_strength: float | None = None
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "premise", tuple(self.premise))
        w = float(self.weight)
        if not math.isfinite(w) or w < 0.0 or w > 1.0:
            raise DomainError(f"rule {self.id!r}: weight must lie in (0, 1), got {self.weight!r}")
        if w < WEIGHT_CLAMP or w > 1.0 - WEIGHT_CLAMP:
            clamped = min(max(w, WEIGHT_CLAMP), 1.0 - WEIGHT_CLAMP)
            warnings.warn(
                f"rule {self.id!r}: degenerate weight {w!r} clamped to {clamped!r}",
                stacklevel=2,
            )
            object.__setattr__(self, "weight", clamped)
            object.__setattr__(self, "clamped", True)
        else:
            object.__setattr__(self, "weight", w)

    @property
    def is_intercept(self) -> bool:
        return len(self.premise) == 0

    def points(self, scale_a: float = 1.0) -> float:
        return points_from_weight(self.weight, scale_a)


def triggers(rule: Rule, record: Sequence[int] | np.ndarray) -> bool:
    """True iff every premise literal matches the record.

    The intercept (empty premise) triggers on every record.
    """
    rec = np.asarray(record)
    if rec.ndim != 1:
        raise StructuralError(f"record must be a 1-d vector, got shape {rec.shape}")
    for lit in rule.premise:
        if lit.feature_index >= rec.shape[0]:
            raise StructuralError(
                f"rule {rule.id!r}: literal index {lit.feature_index} out of range "
                f"for record of length {rec.shape[0]}"
            )
        if bool(rec[lit.feature_index]) != lit.expected:
            return False
    return True


@dataclass(frozen=True)
class RuleContribution:
    rule_id: str
    triggered: bool
    points: float


@dataclass(frozen=True)
class Explanation:
    """Per-rule breakdown of one record's score."""

    record_id: str
    contributions: tuple[RuleContribution, ...]
    total_points: float
    probability: float | None

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "contributions": [
                {"rule_id": c.rule_id, "triggered": c.triggered, "points": c.points}
                for c in self.contributions
            ],
            "total_points": self.total_points,
            "probability": self.probability,
        }


class RuleModel:
    """Ordered rule list with exactly one intercept, a scale factor and a mode.

    Immutable after construction; all scoring methods are pure and accept a
    single record (1-d) or a batch (2-d, one record per row).
    """

    def __init__(
        self,
        rules: Iterable[Rule],
        feature_names: Sequence[str],
        scale_a: float = 1.0,
        mode: Mode = "classifier",
    ):
        rules = tuple(rules)
        feature_names = tuple(str(n) for n in feature_names)
        if not math.isfinite(scale_a) or scale_a <= 0:
            raise DomainError(f"scale_a must be a positive real, got {scale_a!r}")
        if mode not in ("classifier", "regressor"):
            raise ModeError(f"mode must be 'classifier' or 'regressor', got {mode!r}")
        intercepts = [r for r in rules if r.is_intercept]
        if len(intercepts) != 1:
            raise StructuralError(
                f"model must contain exactly one intercept rule, found {len(intercepts)}"
            )
        ids = [r.id for r in rules]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise StructuralError(f"rule ids must be unique, duplicated: {dupes}")
        for r in rules:
            for lit in r.premise:
                if lit.feature_index >= len(feature_names):
                    raise StructuralError(
                        f"rule {r.id!r}: literal index {lit.feature_index} out of range "
                        f"for {len(feature_names)} features"
                    )
        self._rules = rules
        self._feature_names = feature_names
        self._scale_a = float(scale_a)
        self._mode: Mode = mode
        self._by_id = {r.id: i for i, r in enumerate(rules)}

    # -- structure ---------------------------------------------------------

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self._rules

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self._feature_names

    @property
    def scale_a(self) -> float:
        return self._scale_a

    @property
    def mode(self) -> Mode:
        return self._mode

    @property
    def intercept(self) -> Rule:
        return next(r for r in self._rules if r.is_intercept)

    def rule(self, rule_id: str) -> Rule:
        try:
            return self._rules[self._by_id[rule_id]]
        except KeyError:
            raise StructuralError(
                f"unknown rule id {rule_id!r}; known ids: {sorted(self._by_id)}"
            ) from None

    def points_vector(self) -> np.ndarray:
        """Points per rule, in rule order."""
        return np.array([r.points(self._scale_a) for r in self._rules], dtype=np.float64)

    def with_rules(self, rules: Iterable[Rule]) -> "RuleModel":
        return RuleModel(rules, self._feature_names, self._scale_a, self._mode)

    def with_mode(self, mode: Mode) -> "RuleModel":
        return RuleModel(self._rules, self._feature_names, self._scale_a, mode)

    def with_weights(self, weights: Sequence[float]) -> "RuleModel":
        if len(weights) != len(self._rules):
            raise StructuralError(
                f"expected {len(self._rules)} weights, got {len(weights)}"
            )
        return self.with_rules(
            replace(r, weight=float(w)) for r, w in zip(self._rules, weights)
        )

    # -- scoring -----------------------------------------------------------

    def _as_batch(self, records) -> tuple[np.ndarray, bool]:
        arr = np.asarray(records)
        single = arr.ndim == 1
        batch = np.atleast_2d(arr)
        if batch.shape[1] != len(self._feature_names):
            raise StructuralError(
                f"record has {batch.shape[1]} features, model expects "
                f"{len(self._feature_names)}"
            )
        return batch.astype(bool), single

    def trigger_matrix(self, records) -> np.ndarray:
        """Boolean (n_records, n_rules) matrix of rule triggers."""
        batch, _ = self._as_batch(records)
        out = np.ones((batch.shape[0], len(self._rules)), dtype=bool)
        for j, rule in enumerate(self._rules):
            for lit in rule.premise:
                np.logical_and(out[:, j], batch[:, lit.feature_index] == lit.expected, out=out[:, j])
        return out

    def score_points(self, records) -> float | np.ndarray:
        """Intercept points plus the points of every triggered rule."""
        batch, single = self._as_batch(records)
        trig = self.trigger_matrix(batch)
        scores = trig.astype(np.float64) @ self.points_vector()
        return float(scores[0]) if single else scores

    def predict_proba(self, records) -> float | np.ndarray:
        """P(target=1 | record) in classifier mode: ``sigmoid(-S/a)``."""
        if self._mode != "classifier":
            raise ModeError("predict_proba requires classifier mode")
        batch, single = self._as_batch(records)
        s = np.asarray(self.score_points(batch), dtype=np.float64)
        p = _sigmoid(-s / self._scale_a)
        return float(p[0]) if single else p

    def predict_value(self, records) -> float | np.ndarray:
        """Regression output; lives in points space (additive with base scores)."""
        if self._mode != "regressor":
            raise ModeError("predict_value requires regressor mode")
        return self.score_points(records)

    def explain(self, record, record_id: str = "") -> Explanation:
        rec, single = self._as_batch(record)
        if not single and rec.shape[0] != 1:
            raise StructuralError("explain takes a single record")
        trig = self.trigger_matrix(rec)[0]
        pts = self.points_vector()
        contribs = tuple(
            RuleContribution(r.id, bool(t), float(p))
            for r, t, p in zip(self._rules, trig, pts)
        )
        total = float(pts[trig].sum())
        proba = self.predict_proba(rec[0]) if self._mode == "classifier" else None
        return Explanation(record_id, contribs, total, proba)

    def __repr__(self) -> str:
        return (
            f"RuleModel(rules={len(self._rules)}, features={len(self._feature_names)}, "
            f"mode={self._mode!r}, scale_a={self._scale_a})"
        )


def design_matrix(feature_names: Sequence[str], dataset) -> np.ndarray:
    """Project a binary dataset onto ``feature_names`` by name (order preserved).

    The dataset may carry extra columns; a missing name is a structural error.
    """
    index = {n: i for i, n in enumerate(dataset.feature_names)}
    missing = [n for n in feature_names if n not in index]
    if missing:
        raise StructuralError(f"dataset lacks features required by the model: {missing}")
    cols = [index[n] for n in feature_names]
    return np.asarray(dataset.records)[:, cols].astype(bool)


# -- joint-distribution oracle ----------------------------------------------


@dataclass(frozen=True)
class JointDistribution:
    """Exact joint over ``variable_count`` binary variables.

    Assignment ``k`` sets variable ``i`` to bit ``i`` of ``k``. Kept fully
    enumerated, so construction is limited to 20 variables.
    """

    variable_count: int
    probabilities: np.ndarray
    z_norm: float
    target_index: int

    def conditional_target_probability(self, evidence: dict[int, bool] | None = None) -> float:
        """P(target = 1 | evidence), with evidence as {variable index: value}."""
        evidence = evidence or {}
        n = self.variable_count
        idx = np.arange(self.probabilities.shape[0])
        mask = np.ones_like(idx, dtype=bool)
        for var, val in evidence.items():
            if not (0 <= var < n):
                raise StructuralError(f"evidence variable {var} out of range")
            bit = (idx >> var) & 1
            mask &= bit == int(bool(val))
        total = self.probabilities[mask].sum()
        if total <= 0:
            raise DomainError("evidence has zero probability")
        target_bit = ((idx >> self.target_index) & 1).astype(bool)
        return float(self.probabilities[mask & target_bit].sum() / total)


def brute_force_joint(
    rules: Iterable[Rule],
    n_vars: int,
    target_index: int | None = None,
) -> JointDistribution:
    """Enumerate the Markov-logic joint of ``rules`` over ``n_vars`` variables.

    Each rule's potential is ``psi`` on assignments satisfying it (premise
    false, or premise and target both true) and ``1 - psi`` otherwise; the
    product over rules is normalised by ``Z``. Exponential in ``n_vars``;
    intended as a test oracle, not a scoring path.
    """
    rules = tuple(rules)
    if n_vars < 1 or n_vars > 20:
        raise SizeError(f"joint enumeration supports 1..20 variables, got {n_vars}")
    target = n_vars - 1 if target_index is None else target_index
    if not (0 <= target < n_vars):
        raise StructuralError(f"target_index {target} out of range for {n_vars} variables")
    size = 1 << n_vars
    idx = np.arange(size)
    bits = ((idx[:, None] >> np.arange(n_vars)) & 1).astype(bool)
    potentials = np.ones(size, dtype=np.float64)
    for rule in rules:
        if not (0.0 < rule.weight < 1.0):
            raise DomainError(f"rule {rule.id!r}: weight outside (0, 1)")
        premise_true = np.ones(size, dtype=bool)
        for lit in rule.premise:
            if lit.feature_index >= n_vars:
                raise StructuralError(
                    f"rule {rule.id!r}: literal index {lit.feature_index} out of range"
                )
            premise_true &= bits[:, lit.feature_index] == lit.expected
        satisfied = ~premise_true | bits[:, target]
        potentials *= np.where(satisfied, rule.weight, 1.0 - rule.weight)
    z = float(potentials.sum())
    if z <= 0:
        raise DomainError("all assignments have zero potential")
    return JointDistribution(n_vars, potentials / z, z, target)


# -- serialization -----------------------------------------------------------


def model_to_dict(model: RuleModel) -> dict:
    """JSON document for a model; weights are authoritative, points informative."""
    return {
        "scale_a": model.scale_a,
        "mode": model.mode,
        "features": list(model.feature_names),
        "rules": [
            {
                "id": r.id,
                "label": r.label,
                "premise": [
                    {"feature": model.feature_names[lit.feature_index], "expected": lit.expected}
                    for lit in r.premise
                ],
                "weight": r.weight,
                "points": r.points(model.scale_a),
                **({"mined_strength": r.mined_strength} if r.mined_strength is not None else {}),
            }
            for r in model.rules
        ],
    }


def model_from_dict(doc: dict) -> RuleModel:
    """Load a model document; premise literals are resolved by feature name.

    When a rule carries a ``points`` entry it must agree with the points
    recomputed from its weight to within 1e-9.
    """
    try:
        features = [str(f) for f in doc["features"]]
        rule_docs = doc["rules"]
    except KeyError as exc:
        raise StructuralError(f"model document missing key: {exc}") from None
    findex = {n: i for i, n in enumerate(features)}
    scale_a = float(doc.get("scale_a", 1.0))
    mode = doc.get("mode", "classifier")
    rules = []
    for rd in rule_docs:
        premise = []
        for ld in rd.get("premise", []):
            name = ld["feature"]
            if name not in findex:
                raise StructuralError(
                    f"rule {rd.get('id')!r}: premise references unknown feature {name!r}"
                )
            premise.append(Literal(findex[name], bool(ld.get("expected", True))))
        rule = Rule(
            id=str(rd["id"]),
            premise=tuple(premise),
            weight=float(rd["weight"]),
            label=str(rd.get("label", "")),
            mined_strength=rd.get("mined_strength"),
        )
        if "points" in rd and rd["points"] is not None:
            recomputed = rule.points(scale_a)
            if abs(recomputed - float(rd["points"])) > 1e-9:
                raise DomainError(
                    f"rule {rule.id!r}: stored points {rd['points']!r} disagree with "
                    f"weight-derived points {recomputed!r}"
                )
        rules.append(rule)
    return RuleModel(rules, features, scale_a=scale_a, mode=mode)


def save_model(model: RuleModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> RuleModel:
    return model_from_dict(json.loads(Path(path).read_text()))
