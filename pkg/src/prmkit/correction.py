"""The four-step correction-layer workflow.

Given an outdated scorer M1 and a retrained scorer M2, build an
interpretable rule model C on the score difference so that M1 + C
approximates M2 additively in log-odds:

    1. base scorers M1 (period-1 data) and M2 (period-2 data);
    2. rules are mined on the two periods pooled together, which keeps the
       rule vocabulary stable across the population shift;
    3. C is calibrated as a regressor on z = score(M2) - score(M1) over the
       period-2 train split, with z mapped into points space (-a * z);
    4. scoring adds C's contribution to M1 in log-odds.

Base scorers are either internal rule models (bundled with their own
discretizer) or external per-record score files, so black-box models can
participate through their scores alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal as Lit, Mapping

import numpy as np

from .calibrate import CalibrationConfig, CalibrationReport, calibrate
from .data import (
    BinaryDataset,
    DiscretizationSpec,
    RawDataset,
    concat_raw,
    fit_discretizer,
    split_indices,
    transform,
)
from .errors import DomainError, StructuralError
from .mining import MiningConfig, mine_rules
from .model import RuleModel, _sigmoid, model_from_dict, model_to_dict

LOGODDS_CLAMP = 1e-9

ScoreSpace = Lit["probability", "logodds"]


def logit(p: np.ndarray, clamp: float = LOGODDS_CLAMP) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=np.float64), clamp, 1.0 - clamp)
    return np.log(p / (1.0 - p))


@dataclass(frozen=True)
class BaseScorer:
    """A pluggable base model: an internal rule model or an external score file."""

    kind: Lit["prm", "external"]
    model: RuleModel | None = None
    discretizer: DiscretizationSpec | None = None
    scores: Mapping[str, float] | None = None
    score_space: ScoreSpace = "probability"
    source_path: str | None = None
    content_hash: str | None = None

    @staticmethod
    def from_model(model: RuleModel, discretizer: DiscretizationSpec | None = None) -> "BaseScorer":
        if model.mode != "classifier":
            raise DomainError("internal base scorers must be classifiers")
        return BaseScorer(kind="prm", model=model, discretizer=discretizer)

    @staticmethod
    def from_score_file(path: str | Path, score_space: ScoreSpace = "probability") -> "BaseScorer":
        """Load a CSV with columns record_id, score and optional constant space column."""
        path = Path(path)
        scores: dict[str, float] = {}
        space: str | None = None
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            cols = reader.fieldnames or []
            if "record_id" not in cols or "score" not in cols:
                raise StructuralError(f"{path}: score files need record_id and score columns")
            for row in reader:
                scores[str(row["record_id"])] = float(row["score"])
                if "space" in cols:
                    if space is not None and row["space"] != space:
                        raise StructuralError(f"{path}: mixed score spaces in one file")
                    space = row["space"]
        if space is not None:
            if space not in ("probability", "logodds"):
                raise DomainError(f"{path}: unknown score space {space!r}")
            score_space = space  # type: ignore[assignment]
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        return BaseScorer(
            kind="external",
            scores=scores,
            score_space=score_space,
            source_path=str(path),
            content_hash=digest,
        )


def score_base(scorer: BaseScorer, data: RawDataset | BinaryDataset) -> np.ndarray:
    """Per-record scores in log-odds of the target event.

    Internal rule models score as ``-points/a``; external probabilities are
    clamped to [1e-9, 1-1e-9] and mapped through the logit.
    """
    if scorer.kind == "prm":
        model = scorer.model
        assert model is not None
        if isinstance(data, RawDataset):
            if scorer.discretizer is None:
                raise StructuralError("scoring raw data requires the scorer's discretizer")
            binary = transform(scorer.discretizer, data)
        else:
            binary = data
        records = binary.matrix_for(model.feature_names)
        s = np.asarray(model.score_points(records), dtype=np.float64)
        return -s / model.scale_a
    assert scorer.scores is not None
    missing = [rid for rid in data.record_ids if rid not in scorer.scores]
    if missing:
        shown = ", ".join(missing[:10])
        raise DomainError(
            f"external score file lacks {len(missing)} record ids (first: {shown})"
        )
    values = np.asarray([scorer.scores[rid] for rid in data.record_ids], dtype=np.float64)
    if scorer.score_space == "probability":
        if np.any((values < 0) | (values > 1)):
            raise DomainError("external probabilities must lie in [0, 1]")
        return logit(values)
    if not np.all(np.isfinite(values)):
        raise DomainError("external log-odds scores must be finite")
    return values


def residual_target(m1_scores: np.ndarray, m2_scores: np.ndarray) -> np.ndarray:
    """z = score(M2) - score(M1), in log-odds."""
    s1 = np.asarray(m1_scores, dtype=np.float64)
    s2 = np.asarray(m2_scores, dtype=np.float64)
    if s1.shape != s2.shape:
        raise StructuralError(f"score vectors disagree in shape: {s1.shape} vs {s2.shape}")
    return s2 - s1


@dataclass
class CorrectionPipeline:
    """Everything needed to score new records with M1 plus the correction."""

    m1: BaseScorer
    m2: BaseScorer
    correction: RuleModel
    discretizer: DiscretizationSpec
    z_space: str = "logodds"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.correction.mode != "regressor":
            raise StructuralError("the correction model must be a regressor")
        missing = [
            n for n in self.correction.feature_names if n not in self.discretizer.feature_names
        ]
        if missing:
            raise StructuralError(f"discretizer does not produce features: {missing}")


@dataclass
class CorrectedScores:
    record_ids: tuple[str, ...]
    m1_logodds: np.ndarray
    correction_logodds: np.ndarray
    combined_logodds: np.ndarray
    combined_probability: np.ndarray


def apply_corrected(pipeline: CorrectionPipeline, data: RawDataset) -> CorrectedScores:
    """Score records with M1, add the correction layer, return both and the sum."""
    s1 = score_base(pipeline.m1, data)
    binary = transform(pipeline.discretizer, data)
    records = binary.matrix_for(pipeline.correction.feature_names)
    points = np.asarray(pipeline.correction.predict_value(records), dtype=np.float64)
    c = -points / pipeline.correction.scale_a
    combined = s1 + c
    return CorrectedScores(
        record_ids=data.record_ids,
        m1_logodds=s1,
        correction_logodds=c,
        combined_logodds=combined,
        combined_probability=_sigmoid(combined),
    )


def build_base_model(
    data: RawDataset,
    mining_config: MiningConfig | None = None,
    calib_config: CalibrationConfig | None = None,
    disc_config: dict | None = None,
) -> BaseScorer:
    """Train a self-contained classifier scorer (discretize, mine, calibrate)."""
    mining_config = mining_config or MiningConfig()
    calib_config = calib_config or CalibrationConfig(mode="classifier")
    if calib_config.mode != "classifier":
        raise DomainError("base models are classifiers")
    spec = fit_discretizer(data, disc_config)
    binary = transform(spec, data)
    mined = mine_rules(binary, mining_config)
    fitted, _ = calibrate(mined, binary, calib_config)
    return BaseScorer.from_model(fitted, spec)


def build_correction(
    x1y1: RawDataset,
    x2y2: RawDataset,
    m1: BaseScorer,
    m2: BaseScorer,
    mining_config: MiningConfig | None = None,
    calib_config: CalibrationConfig | None = None,
    disc_config: dict | None = None,
    test_fraction: float = 0.2,
    split_seed: int = 13,
) -> tuple[CorrectionPipeline, CalibrationReport]:
    """Assemble the full pipeline; calibration uses the period-2 train split only."""
    mining_config = mining_config or MiningConfig()
    calib_config = calib_config or CalibrationConfig(mode="regressor")
    if calib_config.mode != "regressor":
        calib_config = CalibrationConfig(
            mode="regressor",
            lam=calib_config.lam,
            max_iterations=calib_config.max_iterations,
            gradient_tolerance=calib_config.gradient_tolerance,
            memory=calib_config.memory,
            seed=calib_config.seed,
        )
    combined = concat_raw(x1y1, x2y2)
    spec = fit_discretizer(combined, disc_config)
    combined_binary = transform(spec, combined)
    mined = mine_rules(combined_binary, mining_config)
    if len(mined.rules) == 1:
        warnings.warn("no rules beyond the intercept; correction is a pure offset")

    s1 = score_base(m1, x2y2)
    s2 = score_base(m2, x2y2)
    z = residual_target(s1, s2)
    z_points = -mined.scale_a * z

    x2_binary = transform(spec, x2y2).with_target(z_points)
    train_idx, _ = split_indices(x2y2.record_ids, test_fraction, split_seed)
    train = x2_binary.select(train_idx)
    fitted, report = calibrate(mined.with_mode("regressor"), train, calib_config)

    pipeline = CorrectionPipeline(
        m1=m1,
        m2=m2,
        correction=fitted,
        discretizer=spec,
        provenance={
            "x1_hash": x1y1.content_hash(),
            "x2_hash": x2y2.content_hash(),
            "test_fraction": test_fraction,
            "split_seed": split_seed,
            "mining": {
                "max_rules": mining_config.max_rules,
                "max_depth": mining_config.max_depth,
                "min_support": mining_config.min_support,
                "per_variable_cap": mining_config.per_variable_cap,
            },
            "lambda": report.lam,
        },
    )
    return pipeline, report


def build_correction_experiment(
    x1y1: RawDataset,
    x2y2: RawDataset,
    mining_config: MiningConfig | None = None,
    calib_config: CalibrationConfig | None = None,
    disc_config: dict | None = None,
    test_fraction: float = 0.2,
    split_seed: int = 13,
    base_mining_config: MiningConfig | None = None,
) -> tuple[BaseScorer, BaseScorer, CorrectionPipeline, CalibrationReport]:
    """Self-contained two-period experiment with internal rule-model bases.

    M1 and M2 are classifiers trained on their period's train split (same
    split parameters as the correction layer uses for period 2, so the
    period-2 test split is held out everywhere).
    """
    mining_config = mining_config or MiningConfig()
    base_mining = base_mining_config or mining_config
    base_calib = CalibrationConfig(mode="classifier")
    tr1, _ = split_indices(x1y1.record_ids, test_fraction, split_seed)
    tr2, _ = split_indices(x2y2.record_ids, test_fraction, split_seed)
    m1 = build_base_model(x1y1.select(tr1), base_mining, base_calib, disc_config)
    m2 = build_base_model(x2y2.select(tr2), base_mining, base_calib, disc_config)
    pipeline, report = build_correction(
        x1y1,
        x2y2,
        m1,
        m2,
        mining_config,
        calib_config,
        disc_config,
        test_fraction=test_fraction,
        split_seed=split_seed,
    )
    return m1, m2, pipeline, report


# -- serialization -------------------------------------------------------------


def _scorer_to_dict(scorer: BaseScorer) -> dict:
    if scorer.kind == "prm":
        assert scorer.model is not None
        doc: dict = {"kind": "prm", "model": model_to_dict(scorer.model)}
        if scorer.discretizer is not None:
            doc["discretizer"] = scorer.discretizer.to_config_dict()
        return doc
    return {
        "kind": "external",
        "path": scorer.source_path,
        "space": scorer.score_space,
        "content_hash": scorer.content_hash,
    }


def _scorer_from_dict(doc: dict, base_dir: Path | None = None) -> BaseScorer:
    if doc["kind"] == "prm":
        model = model_from_dict(doc["model"])
        disc = None
        if "discretizer" in doc:
            disc = _spec_from_config(doc["discretizer"])
        return BaseScorer(kind="prm", model=model, discretizer=disc)
    path = Path(doc["path"])
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    scorer = BaseScorer.from_score_file(path, doc.get("space", "probability"))
    expected = doc.get("content_hash")
    if expected and scorer.content_hash != expected:
        raise StructuralError(
            f"score file {path} changed since the pipeline was built "
            f"(hash {scorer.content_hash} != {expected})"
        )
    return scorer


def _spec_from_config(config: dict) -> DiscretizationSpec:
    """Rebuild a fitted spec from its serialized config (explicit cuts/groups only)."""
    from .data import CategoryGrouping, NumericBinning

    entries = []
    for name, cfg in config["variables"].items():
        if "cuts" in cfg:
            cuts = [float(c) for c in cfg["cuts"]]
            if cfg.get("bounded"):
                entries.append(NumericBinning(name, tuple(cuts), bounded=True))
            else:
                entries.append(NumericBinning(name, (-math.inf, *cuts, math.inf)))
        elif "groups" in cfg:
            raw_groups = cfg["groups"]
            if isinstance(raw_groups, dict):
                groups = tuple(
                    (str(g), tuple(str(v) for v in vals)) for g, vals in raw_groups.items()
                )
            else:
                groups = tuple(
                    (str(entry.get("name") or ""), tuple(str(v) for v in entry["values"]))
                    for entry in raw_groups
                )
            entries.append(
                CategoryGrouping(name, groups, open_other=bool(cfg.get("open_other", False)))
            )
        else:
            raise StructuralError(f"serialized spec entry for {name!r} has no cuts or groups")
    return DiscretizationSpec(tuple(entries))


def pipeline_to_dict(pipeline: CorrectionPipeline) -> dict:
    return {
        "z_space": pipeline.z_space,
        "m1": _scorer_to_dict(pipeline.m1),
        "m2": _scorer_to_dict(pipeline.m2),
        "correction": model_to_dict(pipeline.correction),
        "discretizer": pipeline.discretizer.to_config_dict(),
        "provenance": pipeline.provenance,
    }


def pipeline_from_dict(doc: dict, base_dir: Path | None = None) -> CorrectionPipeline:
    return CorrectionPipeline(
        m1=_scorer_from_dict(doc["m1"], base_dir),
        m2=_scorer_from_dict(doc["m2"], base_dir),
        correction=model_from_dict(doc["correction"]),
        discretizer=_spec_from_config(doc["discretizer"]),
        z_space=doc.get("z_space", "logodds"),
        provenance=doc.get("provenance", {}),
    )


def save_pipeline(pipeline: CorrectionPipeline, path: str | Path) -> None:
    Path(path).write_text(json.dumps(pipeline_to_dict(pipeline), indent=2, sort_keys=True) + "\n")


def load_pipeline(path: str | Path) -> CorrectionPipeline:
    path = Path(path)
    return pipeline_from_dict(json.loads(path.read_text()), base_dir=path.parent)
