import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

import prmkit as pk
from prmkit.cli import main

TRUTH_DISC = {
    "variables": {
        "cscore": {"cuts": [640, 706, 760]},
        "dti": {"cuts": [43]},
        "orig_rate": {"cuts": [5.25, 6]},
        "ltv": {"cuts": [55, 80]},
    }
}

SCHEMA = {
    "columns": {
        "cscore": "numeric",
        "dti": "numeric",
        "orig_rate": "numeric",
        "ltv": "numeric",
        "num_bo": "categorical",
        "prop_type": "categorical",
        "default": "numeric",
    },
    "target": "default",
    "id": "record_id",
}


def run(*args):
    result = CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)
    return result


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Small end-to-end CLI workspace: synth data, schema, disc config."""
    root = tmp_path_factory.mktemp("cliws")
    (root / "schema.json").write_text(json.dumps(SCHEMA))
    (root / "disc.json").write_text(json.dumps(TRUTH_DISC))
    result = run("synth", "--n1", 6000, "--n2", 6000, "--seed", 99, "--out-dir", root / "data")
    assert result.exit_code == 0, result.output
    return root


class TestSynth:
    def test_outputs_exist(self, workspace):
        assert (workspace / "data" / "regime1.csv").exists()
        assert (workspace / "data" / "truth.json").exists()
        manifest = json.loads((workspace / "data" / "manifest-synth.json").read_text())
        assert set(manifest["outputs"]) >= {
            str(workspace / "data" / "regime1.csv"),
            str(workspace / "data" / "regime2.csv"),
        }

    def test_rerun_byte_identical(self, workspace, tmp_path):
        result = run("synth", "--n1", 6000, "--n2", 6000, "--seed", 99, "--out-dir", tmp_path / "again")
        assert result.exit_code == 0
        a = (workspace / "data" / "regime1.csv").read_bytes()
        b = (tmp_path / "again" / "regime1.csv").read_bytes()
        assert a == b


class TestDiscretizeMineCalibrate:
    def test_discretize(self, workspace, tmp_path):
        out = tmp_path / "disc"
        result = run(
            "discretize", "--data", workspace / "data" / "regime1.csv",
            "--schema", workspace / "schema.json", "--config", workspace / "disc.json",
            "--out-dir", out,
        )
        assert result.exit_code == 0, result.output
        doc = json.loads((out / "discretizer.json").read_text())
        assert doc["variables"]["cscore"]["cuts"] == [640, 706, 760]

    def test_mine_then_calibrate(self, workspace, tmp_path):
        mined = tmp_path / "mined"
        result = run(
            "mine", "--data", workspace / "data" / "regime1.csv",
            "--schema", workspace / "schema.json", "--disc", workspace / "disc.json",
            "--max-rules", 8, "--out-dir", mined,
        )
        assert result.exit_code == 0, result.output
        model = pk.load_model(mined / "model.json")
        assert len(model.rules) == 9
        calibrated = tmp_path / "calib"
        result = run(
            "calibrate", "--model", mined / "model.json",
            "--data", workspace / "data" / "regime1.csv",
            "--schema", workspace / "schema.json", "--disc", mined / "discretizer.json",
            "--mode", "classifier", "--out-dir", calibrated,
        )
        assert result.exit_code == 0, result.output
        assert "Rule Identifier" in result.output
        fitted = pk.load_model(calibrated / "calibrated.json")
        assert any(r.weight != 0.5 for r in fitted.rules)


@pytest.fixture(scope="module")
def corrected(workspace):
    out = workspace / "correct"
    result = run(
        "correct", "--x1", workspace / "data" / "regime1.csv",
        "--x2", workspace / "data" / "regime2.csv",
        "--schema", workspace / "schema.json", "--disc", workspace / "disc.json",
        "--max-rules", 8, "--seed", 13, "--out-dir", out,
    )
    assert result.exit_code == 0, result.output
    return out


class TestCorrectAndEvaluate:
    def test_pipeline_written(self, corrected):
        pipeline = pk.load_pipeline(corrected / "pipeline.json")
        assert pipeline.correction.mode == "regressor"
        assert len(pipeline.correction.rules) == 9

    def test_correct_rerun_manifests_byte_identical(self, workspace, corrected, tmp_path):
        rerun = tmp_path / "correct2"
        result = run(
            "correct", "--x1", workspace / "data" / "regime1.csv",
            "--x2", workspace / "data" / "regime2.csv",
            "--schema", workspace / "schema.json", "--disc", workspace / "disc.json",
            "--max-rules", 8, "--seed", 13, "--out-dir", rerun,
        )
        assert result.exit_code == 0
        a = (corrected / "pipeline.json").read_bytes()
        b = (rerun / "pipeline.json").read_bytes()
        assert a == b

    def test_evaluate_with_curve_and_bands(self, workspace, corrected, tmp_path):
        out = tmp_path / "eval"
        result = run(
            "evaluate", "--pipeline", corrected / "pipeline.json",
            "--x1", workspace / "data" / "regime1.csv",
            "--x2", workspace / "data" / "regime2.csv",
            "--schema", workspace / "schema.json",
            "--learning-curve", "1,4,8",
            "--band-variable", "cscore", "--band-cuts", "640,706,760",
            "--out-dir", out,
        )
        assert result.exit_code == 0, result.output
        summary = json.loads((out / "evaluation.json").read_text())
        assert {"auc_m1", "auc_m2", "auc_combined"} <= set(summary)
        curve = (out / "learning_curve.csv").read_text().splitlines()
        assert curve[0] == "k,auc_m1,auc_m2,auc_combined"
        assert len(curve) == 4
        bands = json.loads((out / "bands.json").read_text())
        assert sum(r["count"] for r in bands["rows"]) == 6000

    def test_cluster_command(self, workspace, corrected, tmp_path):
        out = tmp_path / "clusters"
        result = run(
            "cluster", "--pipeline", corrected / "pipeline.json",
            "--data", workspace / "data" / "regime2.csv",
            "--schema", workspace / "schema.json",
            "--min-support", 0.05, "--out-dir", out,
        )
        assert result.exit_code == 0, result.output
        doc = json.loads((out / "clusters.json").read_text())
        assert all(c["support"] >= 0.05 for c in doc["combos"])


class TestScenarioCli:
    def test_scenario_matches_service_byte_for_byte(self, workspace, corrected, tmp_path):
        from fastapi.testclient import TestClient

        from prmkit.service import ApiSession, create_app

        spec = {
            "name": "stress",
            "overrides": [{"rule_id": "R-01", "action": "scale_points", "factor": 1.5}],
            "crisis_likelihood": 0.4,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "scen"
        result = run(
            "scenario", "--pipeline", corrected / "pipeline.json",
            "--data", workspace / "data" / "regime2.csv",
            "--schema", workspace / "schema.json", "--spec", spec_path,
            "--band-variable", "cscore", "--band-cuts", "640,706,760",
            "--out-dir", out,
        )
        assert result.exit_code == 0, result.output
        cli_bytes = (out / "scenario_report.json").read_bytes()

        pipeline = pk.load_pipeline(corrected / "pipeline.json")
        dataset = pk.load_csv(
            workspace / "data" / "regime2.csv", SCHEMA["columns"], "default",
            id_column="record_id",
        )
        session = ApiSession(
            pipeline, dataset, band_variable="cscore", band_cuts=(640.0, 706.0, 760.0)
        )
        client = TestClient(create_app(session))
        service_bytes = client.post("/v1/scenario", json=spec).content
        assert cli_bytes == service_bytes

    def test_q_flag_overrides_spec(self, workspace, corrected, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({"name": "n", "overrides": []}))
        out = tmp_path / "scen2"
        result = run(
            "scenario", "--pipeline", corrected / "pipeline.json",
            "--data", workspace / "data" / "regime2.csv",
            "--schema", workspace / "schema.json", "--spec", spec_path,
            "--q", 0.0, "--out-dir", out,
        )
        assert result.exit_code == 0
        doc = json.loads((out / "scenario_report.json").read_text())
        assert doc["overall"]["expected"] == doc["overall"]["base"]


class TestFailureCleanup:
    def test_partial_outputs_removed(self, workspace, tmp_path):
        bad_schema = tmp_path / "schema.json"
        bad_schema.write_text(json.dumps({"columns": {"nope": "numeric"}, "target": "nope"}))
        out = tmp_path / "broken"
        result = run(
            "mine", "--data", workspace / "data" / "regime1.csv",
            "--schema", bad_schema, "--out-dir", out,
        )
        assert result.exit_code == 1
        assert "error:" in result.output
        assert not list(out.glob("*.json"))
