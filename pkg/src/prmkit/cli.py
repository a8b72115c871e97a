"""Command-line surface: one subcommand per pipeline stage.

Every run writes its artifacts plus a manifest (hashed inputs/outputs,
effective config, versions) into the output directory; reruns with the same
inputs and seeds are byte-identical. Partial outputs are removed on failure.

File formats are JSON throughout and documented in the README: a dataset
schema (column kinds + target), a discretizer config, model and pipeline
documents, and the scenario spec shared with the HTTP service.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import (
    auc,
    band_report,
    cluster_quality,
    frequent_rule_combos,
    impact_table,
    learning_curve,
)
from .calibrate import CalibrationConfig, calibrate
from .correction import (
    BaseScorer,
    apply_corrected,
    build_correction,
    build_correction_experiment,
    load_pipeline,
    save_pipeline,
    score_base,
)
from .data import (
    RawDataset,
    SyntheticConfig,
    SyntheticVariable,
    default_two_regime_config,
    fit_discretizer,
    generate_synthetic,
    load_csv,
    split_indices,
    transform,
    write_csv,
)
from .errors import PrmError
from .manifest import OutputTracker, canonical_json, write_manifest
from .mining import MiningConfig, mine_rules
from .model import load_model, save_model
from .scenario import scenario_report, spec_from_dict


def _read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _load_schema(path: str | Path) -> tuple[dict[str, str], str, str | None]:
    doc = _read_json(path)
    return dict(doc["columns"]), str(doc["target"]), doc.get("id")


def _load_raw(data_path: str, schema_path: str) -> RawDataset:
    columns, target, id_col = _load_schema(schema_path)
    return load_csv(data_path, columns, target, id_column=id_col)


def _mining_config(config: dict) -> MiningConfig:
    return MiningConfig(
        max_rules=int(config.get("max_rules", 15)),
        max_depth=int(config.get("max_depth", 1)),
        min_support=float(config.get("min_support", 0.01)),
        per_variable_cap=int(config.get("per_variable_cap", 3)),
    )


def _calib_config(config: dict, mode: str) -> CalibrationConfig:
    return CalibrationConfig(
        mode=mode,  # type: ignore[arg-type]
        lam=config.get("lambda"),
        max_iterations=int(config.get("max_iterations", 500)),
        gradient_tolerance=float(config.get("gradient_tolerance", 1e-8)),
        memory=int(config.get("memory", 10)),
        seed=int(config.get("seed", 0)),
    )


def _scorer_option(scores_path: str | None, space: str) -> BaseScorer | None:
    if scores_path is None:
        return None
    return BaseScorer.from_score_file(scores_path, space)  # type: ignore[arg-type]


def _print_rule_table(model, data) -> None:
    rows = impact_table(model, data)
    click.echo(f"{'Rule Identifier':<16}{'Rule Definition':<42}{'Points':>8}")
    for row in rows:
        label = row.label if row.label else "-"
        click.echo(f"{row.rule_id:<16}{label:<42}{row.points:>8.2f}")


def _write_rows_csv(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        if not rows:
            fh.write("")
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Probabilistic rule models as interpretable correction layers."""
    import logging
    import os

    logging.basicConfig(level=os.environ.get("PRMKIT_LOG_LEVEL", "INFO").upper())


def _run(tracker: OutputTracker, fn) -> None:
    try:
        fn()
    except PrmError as exc:
        tracker.discard_partial()
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


# -- synth ---------------------------------------------------------------------


def _synthetic_config_from_dict(doc: dict) -> SyntheticConfig:
    variables = []
    for vd in doc["variables"]:
        if vd["kind"] == "numeric":
            variables.append(
                SyntheticVariable(
                    name=vd["name"],
                    kind="numeric",
                    mean=float(vd.get("mean", 0.0)),
                    sd=float(vd.get("sd", 1.0)),
                    lo=float(vd.get("lo", -np.inf)),
                    hi=float(vd.get("hi", np.inf)),
                    cuts=tuple(float(c) for c in vd.get("cuts", ())),
                )
            )
        else:
            variables.append(
                SyntheticVariable(
                    name=vd["name"],
                    kind="categorical",
                    levels=tuple((str(k), float(v)) for k, v in vd["levels"].items()),
                )
            )
    return SyntheticConfig(
        n_regime1=int(doc.get("n_regime1", 50_000)),
        n_regime2=int(doc.get("n_regime2", 50_000)),
        seed=int(doc.get("seed", 0)),
        variables=tuple(variables),
        coef_regime1=dict(doc["coef_regime1"]),
        coef_regime2=dict(doc["coef_regime2"]),
        acceptance_threshold=doc.get("acceptance_threshold"),
        acceptance_noise_sd=float(doc.get("acceptance_noise_sd", 1.0)),
        target_name=str(doc.get("target_name", "default")),
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Generator config JSON; defaults to the bundled two-regime fixture.")
@click.option("--n1", type=int, default=None, help="Regime-1 record count override.")
@click.option("--n2", type=int, default=None, help="Regime-2 record count override.")
@click.option("--seed", type=int, default=None, help="Generator seed override.")
@click.option("--out-dir", type=click.Path(), required=True)
def synth(config_path, n1, n2, seed, out_dir):
    """Generate the two-regime synthetic datasets."""
    tracker = OutputTracker(out_dir)

    def go():
        if config_path is None:
            config = default_two_regime_config(
                n_regime1=n1 or 50_000, n_regime2=n2 or 50_000, seed=seed if seed is not None else 20080915
            )
        else:
            doc = _read_json(config_path)
            if n1 is not None:
                doc["n_regime1"] = n1
            if n2 is not None:
                doc["n_regime2"] = n2
            if seed is not None:
                doc["seed"] = seed
            config = _synthetic_config_from_dict(doc)
        regime1, regime2, truth = generate_synthetic(config)
        p1 = tracker.path("regime1.csv")
        p2 = tracker.path("regime2.csv")
        pt = tracker.path("truth.json")
        write_csv(regime1, p1)
        write_csv(regime2, p2)
        pt.write_text(canonical_json(truth))
        write_manifest(
            tracker.out_dir,
            "synth",
            {"seed": config.seed, "n_regime1": config.n_regime1, "n_regime2": config.n_regime2},
            [config_path] if config_path else [],
            [p1, p2, pt],
        )
        click.echo(f"wrote {p1} ({config.n_regime1} rows), {p2} ({config.n_regime2} rows)")

    _run(tracker, go)


# -- discretize / mine / calibrate ----------------------------------------------


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out-dir", type=click.Path(), required=True)
def discretize(data_path, schema_path, config_path, out_dir):
    """Fit a discretizer and write it in the declarative config format."""
    tracker = OutputTracker(out_dir)

    def go():
        raw = _load_raw(data_path, schema_path)
        config = _read_json(config_path) if config_path else None
        spec = fit_discretizer(raw, config)
        out = tracker.path("discretizer.json")
        out.write_text(canonical_json(spec.to_config_dict()))
        write_manifest(
            tracker.out_dir,
            "discretize",
            {"config": config or {}},
            [data_path, schema_path] + ([config_path] if config_path else []),
            [out],
        )
        click.echo(f"wrote {out} ({len(spec.feature_names)} binary features)")

    _run(tracker, go)


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--disc", "disc_path", type=click.Path(exists=True), default=None,
              help="Discretizer config; fitted from data when omitted.")
@click.option("--max-rules", type=int, default=15, show_default=True)
@click.option("--max-depth", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--min-support", type=float, default=0.01, show_default=True)
@click.option("--per-variable-cap", type=int, default=3, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def mine(data_path, schema_path, disc_path, max_rules, max_depth, min_support, per_variable_cap, out_dir):
    """Mine an uncalibrated rule model (all weights 0.5)."""
    tracker = OutputTracker(out_dir)

    def go():
        raw = _load_raw(data_path, schema_path)
        disc_config = _read_json(disc_path) if disc_path else None
        spec = fit_discretizer(raw, disc_config)
        binary = transform(spec, raw)
        config = MiningConfig(max_rules, max_depth, min_support, per_variable_cap)
        model = mine_rules(binary, config)
        model_path = tracker.path("model.json")
        disc_out = tracker.path("discretizer.json")
        save_model(model, model_path)
        disc_out.write_text(canonical_json(spec.to_config_dict()))
        write_manifest(
            tracker.out_dir,
            "mine",
            {
                "max_rules": max_rules,
                "max_depth": max_depth,
                "min_support": min_support,
                "per_variable_cap": per_variable_cap,
            },
            [data_path, schema_path] + ([disc_path] if disc_path else []),
            [model_path, disc_out],
        )
        click.echo(f"wrote {model_path} ({len(model.rules)} rules incl. intercept)")

    _run(tracker, go)


@main.command("calibrate")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--disc", "disc_path", type=click.Path(exists=True), required=True)
@click.option("--mode", type=click.Choice(["classifier", "regressor"]), default="classifier",
              show_default=True)
@click.option("--lambda", "lam", type=float, default=None, help="Ridge strength; scale-aware default.")
@click.option("--out-dir", type=click.Path(), required=True)
def calibrate_cmd(model_path, data_path, schema_path, disc_path, mode, lam, out_dir):
    """Calibrate rule weights on a dataset and print the points table."""
    tracker = OutputTracker(out_dir)

    def go():
        from .correction import _spec_from_config

        raw = _load_raw(data_path, schema_path)
        spec = _spec_from_config(_read_json(disc_path))
        binary = transform(spec, raw)
        model = load_model(model_path).with_mode(mode)
        config = _calib_config({"lambda": lam}, mode)
        fitted, report = calibrate(model, binary, config)
        out_model = tracker.path("calibrated.json")
        out_report = tracker.path("calibration_report.json")
        save_model(fitted, out_model)
        out_report.write_text(canonical_json(report.to_dict()))
        write_manifest(
            tracker.out_dir,
            "calibrate",
            {"mode": mode, "lambda": report.lam},
            [model_path, data_path, schema_path, disc_path],
            [out_model, out_report],
        )
        _print_rule_table(fitted, binary)
        click.echo(
            f"converged={report.converged} iterations={report.iterations} "
            f"objective={report.objective:.6g}"
        )

    _run(tracker, go)


# -- correct ---------------------------------------------------------------------


@main.command()
@click.option("--x1", "x1_path", type=click.Path(exists=True), required=True,
              help="Period-1 raw CSV (outdated regime).")
@click.option("--x2", "x2_path", type=click.Path(exists=True), required=True,
              help="Period-2 raw CSV (current regime).")
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--disc", "disc_path", type=click.Path(exists=True), default=None)
@click.option("--m1-scores", type=click.Path(exists=True), default=None,
              help="External period-aligned score CSV for M1 (else an internal rule model is trained).")
@click.option("--m2-scores", type=click.Path(exists=True), default=None)
@click.option("--score-space", type=click.Choice(["probability", "logodds"]), default="probability")
@click.option("--max-rules", type=int, default=15, show_default=True)
@click.option("--min-support", type=float, default=0.01, show_default=True)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--test-fraction", type=float, default=None,
              help="Held-out fraction of X2 [config key test_fraction; default 0.2].")
@click.option("--seed", type=int, default=None,
              help="Split seed [config key seed; default 13].")
@click.option("--out-dir", type=click.Path(), required=True)
def correct(x1_path, x2_path, schema_path, disc_path, m1_scores, m2_scores, score_space,
            max_rules, min_support, lam, test_fraction, seed, out_dir):
    """Run the full correction workflow and write the pipeline document."""
    tracker = OutputTracker(out_dir)

    def go():
        nonlocal test_fraction, seed
        x1 = _load_raw(x1_path, schema_path)
        x2 = _load_raw(x2_path, schema_path)
        disc_config = _read_json(disc_path) if disc_path else None
        # flags override config-file keys, which override the built-ins
        if test_fraction is None:
            test_fraction = float((disc_config or {}).get("test_fraction", 0.2))
        if seed is None:
            seed = int((disc_config or {}).get("seed", 13))
        mining_config = MiningConfig(max_rules=max_rules, min_support=min_support)
        calib_config = CalibrationConfig(mode="regressor", lam=lam)
        m1 = _scorer_option(m1_scores, score_space)
        m2 = _scorer_option(m2_scores, score_space)
        if (m1 is None) != (m2 is None):
            raise PrmError("supply score files for both base models or neither")
        if m1 is None:
            m1, m2, pipeline, report = build_correction_experiment(
                x1, x2, mining_config, calib_config, disc_config,
                test_fraction=test_fraction, split_seed=seed,
            )
        else:
            pipeline, report = build_correction(
                x1, x2, m1, m2, mining_config, calib_config, disc_config,
                test_fraction=test_fraction, split_seed=seed,
            )
        pipe_path = tracker.path("pipeline.json")
        report_path = tracker.path("correction_report.json")
        save_pipeline(pipeline, pipe_path)
        report_path.write_text(canonical_json(report.to_dict()))
        write_manifest(
            tracker.out_dir,
            "correct",
            {
                "max_rules": max_rules,
                "min_support": min_support,
                "lambda": report.lam,
                "test_fraction": test_fraction,
                "seed": seed,
                "external_scores": m1_scores is not None,
            },
            [x1_path, x2_path, schema_path]
            + ([disc_path] if disc_path else [])
            + ([m1_scores, m2_scores] if m1_scores else []),
            [pipe_path, report_path],
        )
        binary = transform(pipeline.discretizer, x2)
        _print_rule_table(pipeline.correction, binary)
        click.echo(f"wrote {pipe_path}")

    _run(tracker, go)


# -- evaluate ---------------------------------------------------------------------


@main.command()
@click.option("--pipeline", "pipeline_path", type=click.Path(exists=True), required=True)
@click.option("--x1", "x1_path", type=click.Path(exists=True), default=None,
              help="Period-1 raw CSV; required for --learning-curve.")
@click.option("--x2", "x2_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--learning-curve", "curve_ks", default=None,
              help="Rule counts, e.g. '1:16' or '1,2,4,8'.")
@click.option("--band-variable", default=None)
@click.option("--band-cuts", default=None, help="Comma-separated cuts, e.g. '640,706,760'.")
@click.option("--out-dir", type=click.Path(), required=True)
def evaluate(pipeline_path, x1_path, x2_path, schema_path, curve_ks, band_variable, band_cuts, out_dir):
    """Evaluate a pipeline on held-out period-2 data (AUC, bands, learning curve)."""
    tracker = OutputTracker(out_dir)

    def go():
        pipeline = load_pipeline(pipeline_path)
        x2 = _load_raw(x2_path, schema_path)
        prov = pipeline.provenance
        fraction = float(prov.get("test_fraction", 0.2))
        seed = int(prov.get("split_seed", 13))
        _, test_idx = split_indices(x2.record_ids, fraction, seed)
        x2_test = x2.select(test_idx)
        y = x2_test.target()
        s1 = score_base(pipeline.m1, x2_test)
        s2 = score_base(pipeline.m2, x2_test)
        combined = apply_corrected(pipeline, x2_test).combined_logodds
        summary = {
            "n_test": int(len(y)),
            "auc_m1": auc(s1, y),
            "auc_m2": auc(s2, y),
            "auc_combined": auc(combined, y),
        }
        outputs = []
        eval_path = tracker.path("evaluation.json")
        outputs.append(eval_path)
        inputs = [pipeline_path, x2_path, schema_path]
        if band_variable:
            cuts = [float(c) for c in (band_cuts or "").split(",") if c != ""]
            report = band_report(pipeline, x2, band_variable, cuts)
            bands_json = tracker.path("bands.json")
            bands_csv = tracker.path("bands.csv")
            bands_json.write_text(canonical_json(report.to_dict()))
            _write_rows_csv(bands_csv, [r.to_dict() for r in report.rows])
            outputs += [bands_json, bands_csv]
        if curve_ks:
            if x1_path is None:
                raise PrmError("--learning-curve needs --x1")
            x1 = _load_raw(x1_path, schema_path)
            inputs.append(x1_path)
            if ":" in curve_ks:
                lo, hi = curve_ks.split(":")
                ks = list(range(int(lo), int(hi) + 1))
            else:
                ks = [int(k) for k in curve_ks.split(",")]
            mining_cfg = MiningConfig(
                max_rules=max(max(ks), 1),
                min_support=float(prov.get("mining", {}).get("min_support", 0.01)),
                max_depth=int(prov.get("mining", {}).get("max_depth", 1)),
                per_variable_cap=int(prov.get("mining", {}).get("per_variable_cap", 3)),
            )
            rows = learning_curve(
                x1, x2, pipeline.m1, pipeline.m2, mining_cfg,
                CalibrationConfig(mode="regressor", lam=prov.get("lambda")),
                ks, pipeline.discretizer.to_config_dict(),
                test_fraction=fraction, split_seed=seed,
            )
            curve_csv = tracker.path("learning_curve.csv")
            _write_rows_csv(curve_csv, rows)
            outputs.append(curve_csv)
            summary["learning_curve"] = rows
        eval_path.write_text(canonical_json(summary))
        write_manifest(
            tracker.out_dir,
            "evaluate",
            {"band_variable": band_variable, "band_cuts": band_cuts, "learning_curve": curve_ks},
            inputs,
            outputs,
        )
        click.echo(canonical_json(summary))

    _run(tracker, go)


# -- cluster -----------------------------------------------------------------------


@main.command()
@click.option("--pipeline", "pipeline_path", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--min-support", type=float, default=0.05, show_default=True)
@click.option("--max-size", type=click.IntRange(2, 4), default=2, show_default=True)
@click.option("--gap-threshold", type=float, default=0.005, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def cluster(pipeline_path, data_path, schema_path, min_support, max_size, gap_threshold, out_dir):
    """Report frequent rule combinations and their calibration quality."""
    tracker = OutputTracker(out_dir)

    def go():
        pipeline = load_pipeline(pipeline_path)
        raw = _load_raw(data_path, schema_path)
        binary = transform(pipeline.discretizer, raw)
        probs = apply_corrected(pipeline, raw).combined_probability
        combos = frequent_rule_combos(
            pipeline.correction, binary, min_support, max_size, probabilities=probs
        )
        quality = [
            cluster_quality(c, pipeline, raw, gap_threshold=gap_threshold).to_dict()
            for c in combos
        ]
        out = tracker.path("clusters.json")
        out.write_text(
            canonical_json(
                {
                    "min_support": min_support,
                    "max_size": max_size,
                    "combos": [c.to_dict() for c in combos],
                    "quality": quality,
                }
            )
        )
        write_manifest(
            tracker.out_dir,
            "cluster",
            {"min_support": min_support, "max_size": max_size, "gap_threshold": gap_threshold},
            [pipeline_path, data_path, schema_path],
            [out],
        )
        click.echo(f"wrote {out} ({len(combos)} combos)")

    _run(tracker, go)


# -- scenario ----------------------------------------------------------------------


@main.command()
@click.option("--pipeline", "pipeline_path", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--spec", "spec_path", type=click.Path(exists=True), required=True)
@click.option("--q", type=float, default=None, help="Crisis likelihood override.")
@click.option("--band-variable", default=None)
@click.option("--band-cuts", default=None)
@click.option("--out-dir", type=click.Path(), required=True)
def scenario(pipeline_path, data_path, schema_path, spec_path, q, band_variable, band_cuts, out_dir):
    """Evaluate a what-if scenario spec against a portfolio."""
    tracker = OutputTracker(out_dir)

    def go():
        pipeline = load_pipeline(pipeline_path)
        raw = _load_raw(data_path, schema_path)
        doc = _read_json(spec_path)
        if q is not None:
            doc["crisis_likelihood"] = q
        spec = spec_from_dict(doc)
        cuts = tuple(float(c) for c in (band_cuts or "").split(",") if c != "")
        report = scenario_report(pipeline, spec, raw, band_variable, cuts)
        out_json = tracker.path("scenario_report.json")
        out_csv = tracker.path("scenario_bands.csv")
        out_json.write_text(canonical_json(report.to_dict()))
        _write_rows_csv(out_csv, [b.to_dict() for b in ([report.overall] + report.bands)])
        write_manifest(
            tracker.out_dir,
            "scenario",
            {"q": q, "band_variable": band_variable, "band_cuts": band_cuts},
            [pipeline_path, data_path, schema_path, spec_path],
            [out_json, out_csv],
        )
        click.echo(canonical_json(report.to_dict()))

    _run(tracker, go)


# -- serve -------------------------------------------------------------------------


@main.command()
@click.option("--pipeline", "pipeline_path", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--band-variable", default=None, help="Default band variable for reports.")
@click.option("--band-cuts", default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Serve the built scenario-explorer (frontend/dist) at /.")
def serve(pipeline_path, data_path, schema_path, host, port, band_variable, band_cuts, ui_dir):
    """Serve the loaded pipeline to the scenario-explorer UI."""
    import uvicorn

    from .service import ApiSession, create_app

    pipeline = load_pipeline(pipeline_path)
    raw = _load_raw(data_path, schema_path)
    cuts = tuple(float(c) for c in (band_cuts or "").split(",") if c != "")
    session = ApiSession(pipeline, raw, band_variable=band_variable, band_cuts=cuts)
    app = create_app(session, ui_dir=ui_dir)
    import os

    uvicorn.run(
        app, host=host, port=port, log_level=os.environ.get("PRMKIT_LOG_LEVEL", "info").lower()
    )


if __name__ == "__main__":
    main()
