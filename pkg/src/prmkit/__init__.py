"""prmkit: probabilistic rule models as interpretable correction layers."""

from .model import (
    Explanation,
    JointDistribution,
    Literal,
    Rule,
    RuleModel,
    brute_force_joint,
    load_model,
    model_from_dict,
    model_to_dict,
    points_from_weight,
    save_model,
    triggers,
    weight_from_points,
)
from .data import (
    BinaryDataset,
    DiscretizationSpec,
    RawDataset,
    SyntheticConfig,
    SyntheticVariable,
    default_two_regime_config,
    fit_discretizer,
    generate_synthetic,
    load_csv,
    split,
    transform,
)
from .mining import CandidateRule, MiningConfig, enumerate_candidates, mine_rules
from .calibrate import (
    CalibrationConfig,
    CalibrationReport,
    calibrate,
    finite_diff_check,
    gradient,
    objective,
)
from .correction import (
    BaseScorer,
    CorrectionPipeline,
    apply_corrected,
    build_base_model,
    build_correction,
    load_pipeline,
    residual_target,
    save_pipeline,
    score_base,
)
from .analysis import (
    BandReport,
    ImpactRow,
    RuleCombo,
    auc,
    band_report,
    cluster_quality,
    frequent_rule_combos,
    group_rates,
    impact_table,
    learning_curve,
)
from .scenario import (
    Override,
    ScenarioReport,
    ScenarioSpec,
    apply_overrides,
    blend_likelihood,
    scenario_report,
    spec_from_dict,
)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a bundled fixture file (demo data, the 16-rule layer, configs)."""
    from pathlib import Path

    return Path(__file__).parent / "fixtures" / name


__all__ = [name for name in dir() if not name.startswith("_")]
