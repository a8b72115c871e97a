import json

import numpy as np
import pytest

import prmkit as pk
from prmkit.data import BinaryDataset


def make_binary(records, target=None, feature_names=None, groups=None):
    records = np.asarray(records, dtype=np.uint8)
    k = records.shape[1]
    names = tuple(feature_names) if feature_names else tuple(f"f{i}" for i in range(k))
    return BinaryDataset(
        records=records,
        feature_names=names,
        target=None if target is None else np.asarray(target, dtype=np.float64),
        record_ids=tuple(str(i) for i in range(records.shape[0])),
        feature_groups=tuple(groups) if groups else (),
    )


def simple_model(weights, n_features=None, scale_a=1.0, mode="classifier"):
    """One single-literal rule per weight (on feature i) plus intercept (last weight)."""
    *rule_weights, intercept = weights
    k = n_features if n_features is not None else len(rule_weights)
    rules = [
        pk.Rule(f"R-{i + 1:02d}", (pk.Literal(i),), w) for i, w in enumerate(rule_weights)
    ]
    rules.append(pk.Rule(f"R-{len(rule_weights) + 1:02d}", (), intercept))
    return pk.RuleModel(rules, [f"f{i}" for i in range(k)], scale_a, mode)


@pytest.fixture(scope="session")
def table_model():
    return pk.load_model(pk.fixture_path("correction_16rules.json"))


@pytest.fixture(scope="session")
def demo_pipeline():
    return pk.load_pipeline(pk.fixture_path("demo_pipeline.json"))


@pytest.fixture(scope="session")
def mortgage_schema():
    return json.loads(pk.fixture_path("mortgage_schema.json").read_text())


@pytest.fixture(scope="session")
def demo_2010(mortgage_schema):
    return pk.load_csv(
        pk.fixture_path("demo_2010.csv"),
        mortgage_schema["columns"],
        mortgage_schema["target"],
        id_column=mortgage_schema.get("id"),
    )


@pytest.fixture(scope="session")
def demo_2006(mortgage_schema):
    return pk.load_csv(
        pk.fixture_path("demo_2006.csv"),
        mortgage_schema["columns"],
        mortgage_schema["target"],
        id_column=mortgage_schema.get("id"),
    )


TRUTH_CUTS = {
    "variables": {
        "cscore": {"cuts": [640, 706, 760]},
        "dti": {"cuts": [43]},
        "orig_rate": {"cuts": [5.25, 6]},
        "ltv": {"cuts": [55, 80]},
    }
}


@pytest.fixture(scope="session")
def two_regime_50k():
    """The synthetic drift fixture at full acceptance scale; built once."""
    config = pk.default_two_regime_config(50_000, 50_000)
    regime1, regime2, truth = pk.generate_synthetic(config)
    return regime1, regime2, truth


@pytest.fixture(scope="session")
def fitted_experiment(two_regime_50k):
    """Base models + 15+1-rule correction pipeline on the drift fixture."""
    from prmkit.correction import build_correction_experiment

    regime1, regime2, _ = two_regime_50k
    mining = pk.MiningConfig(max_rules=15)
    calib = pk.CalibrationConfig(mode="regressor")
    m1, m2, pipeline, report = build_correction_experiment(
        regime1, regime2, mining, calib, TRUTH_CUTS
    )
    return m1, m2, pipeline, report
