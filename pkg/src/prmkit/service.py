"""Read-only HTTP JSON service around a loaded correction pipeline.

The session (pipeline + scoring dataset) is immutable after load; every
endpoint is a pure function of it plus the request, so identical requests
get identical responses. Scenario evaluation shares the exact code path and
JSON serialization with the CLI, byte for byte.

Endpoints (prefix /v1): GET /health, GET /model, GET /bands, GET /clusters,
GET /explain/{record_id}, POST /scenario.
"""

from __future__ import annotations

import logging
import uuid

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .analysis import band_report, cluster_quality, frequent_rule_combos, impact_table
from .correction import CorrectionPipeline, apply_corrected, transform
from .data import RawDataset
from .errors import PrmError, ValidationError
from .manifest import canonical_json
from .scenario import scenario_report, spec_from_dict

log = logging.getLogger("prmkit.service")


class ApiSession:
    """Immutable service state: pipeline, dataset, derived score columns."""

    def __init__(
        self,
        pipeline: CorrectionPipeline,
        dataset: RawDataset,
        band_variable: str | None = None,
        band_cuts: tuple[float, ...] = (),
    ):
        self.pipeline = pipeline
        self.dataset = dataset
        self.band_variable = band_variable
        self.band_cuts = band_cuts
        self.binary = transform(pipeline.discretizer, dataset)
        self.scored = apply_corrected(pipeline, dataset)
        self.records_by_id = {rid: i for i, rid in enumerate(dataset.record_ids)}

    def model_payload(self) -> dict:
        model = self.pipeline.correction
        rows = impact_table(model, self.binary)
        by_id = {r.id: r for r in model.rules}
        return {
            "scale_a": model.scale_a,
            "mode": model.mode,
            "n_records": self.dataset.row_count,
            "band_variable": self.band_variable,
            "band_cuts": list(self.band_cuts),
            "rules": [
                {
                    "id": row.rule_id,
                    "label": row.label if row.label else "-",
                    "weight": by_id[row.rule_id].weight,
                    "points": row.points,
                    "coverage": row.coverage,
                    "impact": row.impact,
                    "is_intercept": by_id[row.rule_id].is_intercept,
                }
                for row in rows
            ],
        }


def _json(payload: dict, status_code: int = 200) -> Response:
    # canonical serializer shared with the CLI so payloads match byte for byte
    return Response(
        content=canonical_json(payload), media_type="application/json", status_code=status_code
    )


def create_app(session: ApiSession, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="prmkit scenario service", version="1")
    # single-user tool bound to loopback; the UI may be opened from file:// or
    # another local port, so cross-origin reads are fine here
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(Exception)
    async def on_error(request: Request, exc: Exception) -> Response:  # pragma: no cover
        incident = uuid.uuid4().hex
        log.exception("request failed (incident %s)", incident)
        return JSONResponse({"error": "internal failure", "incident": incident}, status_code=500)

    @app.get("/v1/health")
    def health() -> Response:
        return _json({"status": "ok"})

    @app.get("/v1/model")
    def model() -> Response:
        return _json(session.model_payload())

    @app.get("/v1/bands")
    def bands(variable: str | None = None, cuts: str | None = None) -> Response:
        var = variable or session.band_variable
        if var is None:
            return _json({"errors": [{"field": "variable", "message": "band variable required"}]}, 400)
        try:
            cut_values = (
                tuple(float(c) for c in cuts.split(",") if c != "")
                if cuts is not None
                else session.band_cuts
            )
            report = band_report(session.pipeline, session.dataset, var, cut_values)
        except ValueError as exc:
            return _json({"errors": [{"field": "cuts", "message": str(exc)}]}, 400)
        return _json(report.to_dict())

    @app.get("/v1/clusters")
    def clusters(min_support: float = 0.05, max_size: int = 2) -> Response:
        try:
            combos = frequent_rule_combos(
                session.pipeline.correction,
                session.binary,
                min_support,
                max_size,
                probabilities=session.scored.combined_probability,
            )
            quality = [
                cluster_quality(c, session.pipeline, session.dataset).to_dict() for c in combos
            ]
        except PrmError as exc:
            return _json({"errors": [{"field": "query", "message": str(exc)}]}, 400)
        return _json(
            {
                "min_support": min_support,
                "max_size": max_size,
                "combos": [c.to_dict() for c in combos],
                "quality": quality,
            }
        )

    @app.get("/v1/explain/{record_id}")
    def explain(record_id: str) -> Response:
        idx = session.records_by_id.get(record_id)
        if idx is None:
            return _json({"error": f"unknown record id {record_id!r}"}, 404)
        record = session.binary.matrix_for(session.pipeline.correction.feature_names)[idx]
        explanation = session.pipeline.correction.explain(record, record_id=record_id)
        payload = explanation.to_dict()
        payload.update(
            {
                "m1_logodds": float(session.scored.m1_logodds[idx]),
                "correction_logodds": float(session.scored.correction_logodds[idx]),
                "combined_logodds": float(session.scored.combined_logodds[idx]),
                "combined_probability": float(session.scored.combined_probability[idx]),
            }
        )
        return _json(payload)

    @app.post("/v1/scenario")
    async def scenario(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _json({"errors": [{"field": "", "message": "body must be JSON"}]}, 400)
        try:
            spec = spec_from_dict(body)
            report = scenario_report(
                session.pipeline,
                spec,
                session.dataset,
                session.band_variable,
                session.band_cuts,
            )
        except ValidationError as exc:
            return _json(
                {"errors": [{"field": f, "message": m} for f, m in exc.field_errors]}, 400
            )
        except PrmError as exc:
            return _json({"errors": [{"field": "overrides", "message": str(exc)}]}, 400)
        return _json(report.to_dict())

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
