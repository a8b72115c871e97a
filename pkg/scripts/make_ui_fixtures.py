"""Regenerate the frontend test fixtures from the bundled demo pipeline.

Writes, under frontend/tests/fixtures/:
  model.json                     GET /v1/model payload
  spec_noop.json                 canned scenario specs (shared schema)
  spec_disable_r01.json
  spec_scale_r13.json
  report_noop.json               CLI `scenario` outputs for those specs
  report_disable_r01.json
  report_scale_r13.json

The parity test in tests/test_ui_fixtures.py asserts these stay in sync
with the live CLI and service output.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

import prmkit as pk
from prmkit.manifest import canonical_json
from prmkit.scenario import scenario_report, spec_from_dict
from prmkit.service import ApiSession

OUT = ROOT / "frontend" / "tests" / "fixtures"

BAND_VARIABLE = "cscore"
BAND_CUTS = (706.0,)

SPECS = {
    "spec_noop.json": {"name": "no-op", "overrides": [], "crisis_likelihood": None},
    "spec_disable_r01.json": {
        "name": "disable-R-01",
        "overrides": [{"rule_id": "R-01", "action": "disable"}],
        "crisis_likelihood": None,
    },
    "spec_scale_r13.json": {
        "name": "dti-stress",
        "overrides": [{"rule_id": "R-13", "action": "scale_points", "factor": 2.0}],
        "crisis_likelihood": 0.3,
    },
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    pipeline = pk.load_pipeline(pk.fixture_path("demo_pipeline.json"))
    schema = json.loads(pk.fixture_path("mortgage_schema.json").read_text())
    dataset = pk.load_csv(
        pk.fixture_path("demo_2010.csv"),
        schema["columns"],
        schema["target"],
        id_column=schema.get("id"),
    )
    session = ApiSession(pipeline, dataset, band_variable=BAND_VARIABLE, band_cuts=BAND_CUTS)
    (OUT / "model.json").write_text(canonical_json(session.model_payload()))
    for name, doc in SPECS.items():
        (OUT / name).write_text(canonical_json(doc))
        report = scenario_report(
            pipeline, spec_from_dict(doc), dataset, BAND_VARIABLE, BAND_CUTS
        )
        (OUT / name.replace("spec_", "report_")).write_text(canonical_json(report.to_dict()))
    print("ui fixtures written to", OUT)


if __name__ == "__main__":
    main()
