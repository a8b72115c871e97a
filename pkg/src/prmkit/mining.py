"""Candidate rule generation and selection from a binary dataset.

Candidates are single features and (optionally) cross-variable feature
pairs. Ranking uses weight-of-evidence against a binary target, or the
trigger-set mean shift against a continuous one, both scaled by support so
that strong-but-rare patterns do not crowd out material ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import BinaryDataset
from .errors import DomainError, StructuralError
from .model import Literal, Rule, RuleModel


@dataclass(frozen=True)
class MiningConfig:
    max_rules: int = 15
    max_depth: int = 1
    min_support: float = 0.01
    per_variable_cap: int = 3

    def __post_init__(self) -> None:
        if self.max_rules < 1:
            raise DomainError(f"max_rules must be at least 1, got {self.max_rules}")
        if self.max_depth not in (1, 2):
            raise DomainError(f"max_depth must be 1 or 2, got {self.max_depth}")
        if not (0.0 < self.min_support < 1.0):
            raise DomainError(f"min_support must lie in (0, 1), got {self.min_support}")
        if self.per_variable_cap < 1:
            raise DomainError("per_variable_cap must be at least 1")


@dataclass(frozen=True)
class CandidateRule:
    premise: tuple[Literal, ...]
    support: float
    target_rate: float
    strength: float
    feature_names: tuple[str, ...]

    @property
    def label(self) -> str:
        return " & ".join(self.feature_names)


def _woe(y_in: float, n_in: float, y_total: float, n_total: float) -> float:
    # Laplace +0.5 per cell keeps pure cells finite
    bad_in = y_in + 0.5
    good_in = (n_in - y_in) + 0.5
    bad_out = (y_total - y_in) + 0.5
    good_out = (n_total - n_in) - (y_total - y_in) + 0.5
    return math.log((bad_in / good_in) / (bad_out / good_out))


def enumerate_candidates(data: BinaryDataset, config: MiningConfig) -> list[CandidateRule]:
    """Score all admissible premises; sorted by strength, support, then name."""
    if data.target is None:
        raise StructuralError("mining requires a target")
    y = np.asarray(data.target, dtype=np.float64)
    n = data.n_records
    if n == 0 or float(np.var(y)) == 0.0:
        warnings.warn("target has zero variance; no candidates mined")
        return []
    binary_target = data.target_is_binary
    cols = data.records.astype(bool)
    y_total = float(y.sum())
    z_mean = float(y.mean())

    def score(mask: np.ndarray) -> tuple[float, float, float] | None:
        count = int(mask.sum())
        support = count / n
        if support < config.min_support:
            return None
        if binary_target:
            y_in = float(y[mask].sum())
            strength = abs(_woe(y_in, count, y_total, n)) * support
            rate = y_in / count
        else:
            rate = float(y[mask].mean())
            strength = abs(rate - z_mean) * support
        return support, rate, strength

    out: list[CandidateRule] = []
    k = len(data.feature_names)
    for i in range(k):
        got = score(cols[:, i])
        if got is None:
            continue
        support, rate, strength = got
        out.append(
            CandidateRule(
                premise=(Literal(i),),
                support=support,
                target_rate=rate,
                strength=strength,
                feature_names=(data.feature_names[i],),
            )
        )
    if config.max_depth >= 2:
        for i in range(k):
            for j in range(i + 1, k):
                if data.feature_groups[i] == data.feature_groups[j]:
                    continue
                got = score(cols[:, i] & cols[:, j])
                if got is None:
                    continue
                support, rate, strength = got
                out.append(
                    CandidateRule(
                        premise=(Literal(i), Literal(j)),
                        support=support,
                        target_rate=rate,
                        strength=strength,
                        feature_names=(data.feature_names[i], data.feature_names[j]),
                    )
                )
    out.sort(key=lambda c: (-c.strength, -c.support, c.feature_names))
    return out


def mine_rules(data: BinaryDataset, config: MiningConfig) -> RuleModel:
    """Ranked-prefix selection of the top candidates plus the intercept.

    All weights start at 0.5 (zero points) pending calibration. Selection is
    a single scan of the ranked candidates with a per-raw-variable budget,
    so growing ``max_rules`` only ever appends rules.
    """
    candidates = enumerate_candidates(data, config)
    var_counts: dict[str, int] = {}
    chosen: list[CandidateRule] = []
    for cand in candidates:
        if len(chosen) >= config.max_rules:
            break
        variables = {data.feature_groups[lit.feature_index] for lit in cand.premise}
        if any(var_counts.get(v, 0) >= config.per_variable_cap for v in variables):
            continue
        for v in variables:
            var_counts[v] = var_counts.get(v, 0) + 1
        chosen.append(cand)
    if len(chosen) < config.max_rules:
        warnings.warn(
            f"only {len(chosen)} of {config.max_rules} requested rules cleared "
            f"min_support={config.min_support}"
        )
    rules = [
        Rule(
            id=f"R-{i + 1:02d}",
            premise=cand.premise,
            weight=0.5,
            label=cand.label,
            mined_strength=cand.strength,
        )
        for i, cand in enumerate(chosen)
    ]
    rules.append(Rule(id=f"R-{len(chosen) + 1:02d}", premise=(), weight=0.5, label="-"))
    mode = "classifier" if data.target_is_binary else "regressor"
    return RuleModel(rules, data.feature_names, scale_a=1.0, mode=mode)


def prefix_model(model: RuleModel, k: int) -> RuleModel:
    """First ``k`` non-intercept rules plus a fresh intercept (id ``R-{k+1}``)."""
    non_intercept = [r for r in model.rules if not r.is_intercept]
    if k > len(non_intercept):
        raise DomainError(f"model has only {len(non_intercept)} non-intercept rules, asked for {k}")
    kept = list(non_intercept[:k])
    kept.append(Rule(id=f"R-{k + 1:02d}", premise=(), weight=model.intercept.weight, label="-"))
    return RuleModel(kept, model.feature_names, model.scale_a, model.mode)
