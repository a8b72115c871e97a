"""Regenerate the bundled fixtures.

Produces, deterministically:

  src/prmkit/fixtures/correction_16rules.json   the published 16-rule layer
  src/prmkit/fixtures/mortgage_schema.json      schema for the 12-variable walkthrough
  src/prmkit/fixtures/mortgage_disc.json        discretizer with the published cuts
  src/prmkit/fixtures/demo_2006.csv             small mortgage-shaped demo data
  src/prmkit/fixtures/demo_2010.csv
  src/prmkit/fixtures/demo_pipeline.json        M1 trained on demo_2006 + the 16-rule layer

Run from the repo root:  python scripts/make_fixtures.py
"""

from __future__ import annotations


import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

import numpy as np

from prmkit.calibrate import CalibrationConfig
from prmkit.correction import (
    BaseScorer,
    CorrectionPipeline,
    build_base_model,
    save_pipeline,
)
from prmkit.data import (
    SyntheticConfig,
    SyntheticVariable,
    generate_synthetic,
    load_csv,
    write_csv,
)
from prmkit.manifest import canonical_json
from prmkit.mining import MiningConfig
from prmkit.model import Literal, Rule, RuleModel, weight_from_points

FIXTURES = ROOT / "src" / "prmkit" / "fixtures"

# the published correction layer: (id, condition label, premise feature, points)
TABLE_RULES = [
    ("R-01", 'cscore < 706', "cscore<706", -1.98),
    ("R-02", 'orig_rate >= 6', "orig_rate>=6", -0.97),
    ("R-03", 'num_bo < 2', "num_bo<2", -0.11),
    ("R-04", 'loan_term >= 360', "loan_term>=360", 0.47),
    ("R-05", 'purpose in ["U", "P"]', "purpose in [U,P]", 0.7),
    ("R-06", 'orig_rate in [5.25, 6)', "orig_rate in [5.25,6)", -2.92),
    ("R-07", 'prop_type = "SF"', "prop_type=SF", -1.05),
    ("R-08", 'purpose = "C"', "purpose=C", -0.18),
    ("R-09", 'insurance_pct >= 9', "insurance_pct>=9", 1.50),
    ("R-10", 'comb_ltv >= 80', "comb_ltv>=80", -0.91),
    ("R-11", 'state = "area1"', "state=area1", 0.26),
    ("R-12", 'occupancy_type = "P"', "occupancy_type=P", -0.4),
    ("R-13", 'dti >= 43', "dti>=43", -0.87),
    ("R-14", 'comb_ltv < 55', "comb_ltv<55", 0.33),
    ("R-15", 'ltv in [78, 80)', "ltv in [78,80)", -0.76),
    ("R-16", "-", None, 1.71),
]

SCHEMA = {
    "columns": {
        "cscore": "numeric",
        "orig_rate": "numeric",
        "purpose": "categorical",
        "occupancy_type": "categorical",
        "prop_type": "categorical",
        "num_bo": "numeric",
        "state": "categorical",
        "dti": "numeric",
        "ltv": "numeric",
        "comb_ltv": "numeric",
        "loan_term": "numeric",
        "insurance_pct": "numeric",
        "default": "numeric",
    },
    "target": "default",
    "id": "record_id",
}

DISC = {
    "variables": {
        "cscore": {"cuts": [706]},
        "orig_rate": {"cuts": [5.25, 6]},
        "purpose": {"groups": [["U", "P"], ["C"], ["R"]]},
        "occupancy_type": {"groups": [["P"], ["S"], ["I"], ["U"]]},
        "prop_type": {"groups": [["SF"], ["CO"], ["CP"], ["PU"], ["MH"]]},
        "num_bo": {"cuts": [2]},
        "state": {
            "groups": {
                "area1": ["NV", "AZ", "CA", "FL", "MI"],
                "area2": ["NY", "NJ", "CT", "MA", "MD", "VA", "PA", "IL"],
                "area3": ["TX", "GA", "NC", "SC", "TN", "AL", "CO", "WA", "OR"],
                "area4": ["OH", "IN", "MO", "WI", "MN", "KY", "LA", "OK", "UT", "IA"],
            }
        },
        "dti": {"cuts": [43]},
        "ltv": {"cuts": [78, 80]},
        "comb_ltv": {"cuts": [55, 80]},
        "loan_term": {"cuts": [360]},
        "insurance_pct": {"cuts": [9]},
    }
}


def correction_model() -> RuleModel:
    features = [feature for _, _, feature, _ in TABLE_RULES if feature is not None]
    findex = {f: i for i, f in enumerate(features)}
    rules = []
    for rid, label, feature, points in TABLE_RULES:
        premise = (Literal(findex[feature]),) if feature is not None else ()
        rules.append(
            Rule(id=rid, premise=premise, weight=weight_from_points(points, 1.0), label=label)
        )
    return RuleModel(rules, features, scale_a=1.0, mode="regressor")


def demo_config(n1: int, n2: int) -> SyntheticConfig:
    states_pool = {
        "area1": ["NV", "AZ", "CA", "FL", "MI"],
        "area2": ["NY", "NJ", "CT", "MA"],
        "area3": ["TX", "GA", "NC", "WA"],
        "area4": ["OH", "IN", "MO", "WI"],
    }
    levels = []
    shares = {"area1": 0.30, "area2": 0.25, "area3": 0.25, "area4": 0.20}
    for area, states in states_pool.items():
        for s in states:
            levels.append((s, shares[area] / len(states)))
    variables = (
        SyntheticVariable("cscore", "numeric", mean=712, sd=55, lo=540, hi=840, cuts=(706,)),
        SyntheticVariable("orig_rate", "numeric", mean=6.2, sd=0.7, lo=4.0, hi=9.0, cuts=(5.25, 6.0)),
        SyntheticVariable(
            "purpose", "categorical", levels=(("P", 0.45), ("C", 0.25), ("R", 0.25), ("U", 0.05))
        ),
        SyntheticVariable(
            "occupancy_type", "categorical", levels=(("P", 0.82), ("S", 0.08), ("I", 0.09), ("U", 0.01))
        ),
        SyntheticVariable(
            "prop_type",
            "categorical",
            levels=(("SF", 0.60), ("CO", 0.14), ("PU", 0.16), ("MH", 0.06), ("CP", 0.04)),
        ),
        SyntheticVariable("num_bo", "numeric", mean=1.55, sd=0.5, lo=1, hi=3, cuts=(2,)),
        SyntheticVariable("state", "categorical", levels=tuple(levels)),
        SyntheticVariable("dti", "numeric", mean=35, sd=9, lo=10, hi=64, cuts=(43,)),
        SyntheticVariable("ltv", "numeric", mean=74, sd=12, lo=30, hi=99, cuts=(78, 80)),
        SyntheticVariable("comb_ltv", "numeric", mean=76, sd=13, lo=30, hi=110, cuts=(55, 80)),
        SyntheticVariable("loan_term", "numeric", mean=330, sd=45, lo=120, hi=361, cuts=(360,)),
        SyntheticVariable("insurance_pct", "numeric", mean=4, sd=5, lo=0, hi=35, cuts=(9,)),
    )
    coef1 = {
        "intercept": -5.3,
        "cscore<706": 1.1,
        "orig_rate>=6": 0.4,
        "orig_rate in [5.25,6)": 0.15,
        "dti>=43": 0.35,
        "ltv>=80": 0.5,
        "comb_ltv>=80": 0.3,
        "comb_ltv<55": -0.4,
        "num_bo<2": 0.25,
        "prop_type=SF": 0.1,
        "purpose=C": 0.2,
        "state=NV": 0.3,
        "state=AZ": 0.3,
        "state=CA": 0.25,
        "state=FL": 0.35,
        "state=MI": 0.3,
    }
    # period 2 drifts by exactly what the published 16-rule layer prices:
    # delta log-odds = -points per premise feature (group rules spread over
    # their member levels), so the bundled pipeline is coherent on this data
    coef2 = dict(coef1)
    deltas: dict[str, float] = {"intercept": -1.71}
    for _, _, feature, points in TABLE_RULES:
        if feature is None or feature == "state=area1":
            continue
        if feature == "purpose in [U,P]":
            deltas["purpose=U"] = -points
            deltas["purpose=P"] = -points
        else:
            deltas[feature] = -points
    for state in ("NV", "AZ", "CA", "FL", "MI"):
        deltas[f"state={state}"] = -0.26
    for feature, delta in deltas.items():
        coef2[feature] = coef2.get(feature, 0.0) + delta
    return SyntheticConfig(
        n_regime1=n1,
        n_regime2=n2,
        seed=200610,
        variables=variables,
        coef_regime1=coef1,
        coef_regime2=coef2,
        acceptance_threshold=-0.7,
        acceptance_noise_sd=1.0,
    )


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    from prmkit.model import load_model, model_to_dict

    model = correction_model()
    doc = model_to_dict(model)
    # store the published points verbatim; weights stay authoritative and the
    # loader checks agreement at 1e-9, far above the roundtrip error here
    for (rid, _, _, points), rd in zip(TABLE_RULES, doc["rules"]):
        assert rd["id"] == rid and abs(rd["points"] - points) < 1e-12, (rid, rd["points"], points)
        rd["points"] = points
    (FIXTURES / "correction_16rules.json").write_text(canonical_json(doc))
    load_model(FIXTURES / "correction_16rules.json")  # must pass the consistency check

    (FIXTURES / "mortgage_schema.json").write_text(canonical_json(SCHEMA))
    (FIXTURES / "mortgage_disc.json").write_text(canonical_json(DISC))

    config = demo_config(2400, 2400)
    demo_2006, demo_2010, truth = generate_synthetic(config)
    write_csv(demo_2006, FIXTURES / "demo_2006.csv")
    write_csv(demo_2010, FIXTURES / "demo_2010.csv")

    # rebuild via load_csv so the shipped files are exactly what the pipeline saw
    x1 = load_csv(FIXTURES / "demo_2006.csv", SCHEMA["columns"], "default", id_column="record_id")
    x2 = load_csv(FIXTURES / "demo_2010.csv", SCHEMA["columns"], "default", id_column="record_id")
    mining = MiningConfig(max_rules=12, min_support=0.02)
    calib = CalibrationConfig(mode="classifier")
    m1 = build_base_model(x1, mining, calib, DISC)
    m2 = build_base_model(x2, mining, calib, DISC)
    pipeline = CorrectionPipeline(
        m1=m1,
        m2=m2,
        correction=model,
        discretizer=m1.discretizer,
        provenance={
            "note": "demo pipeline: base models trained on the demo extracts, "
            "published 16-rule correction layer",
            "x1": "demo_2006.csv",
            "x2": "demo_2010.csv",
        },
    )
    save_pipeline(pipeline, FIXTURES / "demo_pipeline.json")
    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
