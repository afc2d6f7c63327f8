"""HTTP facade over ingestion, training, simulation, and overlays.

All endpoints live under ``/api/v1`` and speak JSON; error bodies always
carry ``{"code", "message", "details"}`` with codes bad_request,
not_found, validation_failed, or internal. When a built UI bundle
directory is supplied, it is served statically at the root path.
"""
from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .counterfactual import (
    CalibrationTarget,
    InterventionScenario,
    ResponseParams,
    calibrate,
    compute_outcome,
    rank_interventions,
    simulate_scenario,
    UtilityWeights,
    overlay_counterfactual,
)
from .errors import (
    CalibrationError,
    FormatError,
    ParseError,
    RecordError,
    ScenarioValidationError,
)
from .evaluation import default_seeds, run_benchmark
from .ingest import (
    derive_risk_labels,
    impute_gaps,
    load_tabular,
    parse_cgm_csv,
    parse_cgm_xml,
    resample,
    summarize,
)
from .models import ForestConfig, GbmConfig, LogisticConfig, MlpConfig, model_to_json
from .twin import Action, CausalGraph, DEFAULT_FEASIBLE_RANGES, validate_action
from .workspace import Workspace

DATASET_KINDS = ("tabular", "cgm-xml", "cgm-csv")
MODEL_CONFIG_TYPES = {"gbm": GbmConfig, "forest": ForestConfig,
                      "mlp": MlpConfig, "logistic": LogisticConfig}


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message, "details": details})


def scenario_from_dict(doc: dict) -> InterventionScenario:
    return InterventionScenario(
        label=str(doc["label"]),
        action=Action(
            carbs_g=float(doc.get("carbs_g", 0.0)),
            activity_min=float(doc.get("activity_min", 0.0)),
            activity_start_min=float(doc.get("activity_start_min", 0.0)),
            insulin_units=float(doc.get("insulin_units", 0.0)),
        ),
        duration_min=float(doc.get("duration_min", 120.0)),
        seed=int(doc.get("seed", 0)),
    )


def target_from_dict(doc: dict) -> CalibrationTarget:
    return CalibrationTarget(
        scenario=scenario_from_dict(doc),
        target_peak=float(doc["target_peak_mg_dl"]),
        target_tir_pct=float(doc["target_tir_pct"]),
    )


def _resolve_params(body: dict) -> ResponseParams:
    if body.get("response_params") is not None:
        return ResponseParams(**body["response_params"])
    if body.get("calibration_targets") is not None:
        targets = [target_from_dict(t) for t in body["calibration_targets"]]
        return calibrate(targets).params
    return ResponseParams()


def _simulate_payload(body: dict) -> dict:
    scenarios = [scenario_from_dict(s) for s in body.get("scenarios", [])]
    if not scenarios:
        raise FormatError("scenario list is empty")
    graph = CausalGraph()
    violations = []
    for s in scenarios:
        for v in validate_action(graph, s.action):
            violations.append({"scenario": s.label, **v.to_dict()})
    if violations:
        raise ScenarioValidationError(violations)
    params = _resolve_params(body)
    weights = UtilityWeights(**body["weights"]) if body.get("weights") else UtilityWeights()
    named, outcomes = [], []
    for s in scenarios:
        traj = simulate_scenario(params, s, graph)
        named.append((s.label, traj))
        outcomes.append(compute_outcome(traj, params, weights, label=s.label))
    ranking = rank_interventions(outcomes)
    return {
        "params": params.to_dict(),
        "trajectories": [
            {"label": label, "t_min": traj.t_grid.tolist(), "glucose": traj.glucose.tolist()}
            for label, traj in named
        ],
        "outcomes": [o.to_dict() for o in outcomes],
        "ranking": [o.label for o in ranking],
        "_named": named,
        "_outcomes": outcomes,
    }


def create_app(workspace_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="glucotwin", version=__version__)
    ws = Workspace(workspace_dir)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", "request body failed validation", exc.errors())

    @app.exception_handler(Exception)
    async def _on_internal(request: Request, exc: Exception):
        return _error(500, "internal", str(exc))

    @app.get("/api/v1")
    def health():
        return {"status": "ok", "service": "glucotwin", "version": __version__}

    @app.get("/api/v1/feasible-ranges")
    def feasible_ranges():
        return {k: list(v) for k, v in DEFAULT_FEASIBLE_RANGES.items()}

    @app.post("/api/v1/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        try:
            if content_type.startswith("multipart/"):
                form = await request.form()
                kind = form.get("kind")
                items = []
                for key, value in form.multi_items():
                    if hasattr(value, "read"):
                        items.append((value.filename or key, (await value.read()).decode("utf-8")))
            else:
                body = await request.json()
                kind = body.get("kind")
                if "items" in body:
                    items = [(it.get("name", f"part-{i}"), it["content"])
                             for i, it in enumerate(body["items"])]
                else:
                    items = [(body.get("name", "upload"), body["content"])]
        except (json.JSONDecodeError, KeyError, UnicodeDecodeError) as exc:
            return _error(400, "bad_request", f"could not read upload body: {exc}")
        if kind not in DATASET_KINDS:
            return _error(400, "bad_request",
                          f"kind must be one of {DATASET_KINDS}, got {kind!r}")
        if not items:
            return _error(400, "bad_request", "no content supplied")

        try:
            record_count = _validate_dataset(kind, items)
        except (ParseError, RecordError, FormatError) as exc:
            return _error(400, "bad_request", str(exc),
                          {"offset": getattr(exc, "offset", None),
                           "line": getattr(exc, "line", None),
                           "row": getattr(exc, "row", None)})
        stored = ws.store_dataset(kind, items)
        if kind.startswith("cgm"):
            corpus = _load_cgm_corpus(ws, stored)
            summary = summarize(corpus)
            ws.write_dataset_artifact(stored, "summary.json",
                                      json.dumps(summary.to_dict(), indent=2))
        return {"dataset_id": stored.dataset_id, "kind": kind,
                "content_sha256": stored.manifest["content_sha256"],
                "files": len(items), "records": record_count}

    @app.get("/api/v1/cgm/{dataset_id}/summary")
    def cgm_summary(dataset_id: str):
        stored = ws.get_dataset(dataset_id)
        if stored is None:
            return _error(404, "not_found", f"dataset {dataset_id} not found")
        payload = ws.read_dataset_artifact(stored, "summary.json")
        if payload is None:
            return _error(400, "bad_request", f"dataset {dataset_id} is not a CGM dataset")
        return Response(content=payload, media_type="application/json")

    @app.post("/api/v1/train")
    async def train(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"invalid JSON body: {exc}")
        dataset_id = body.get("dataset_id")
        stored = ws.get_dataset(dataset_id) if dataset_id else None
        if stored is None:
            return _error(404, "not_found", f"dataset {dataset_id!r} not found")
        if stored.kind != "tabular":
            return _error(400, "bad_request", "training needs a tabular dataset")
        if "seeds" in body:
            seeds = body["seeds"]
            if not isinstance(seeds, list) or not seeds:
                return _error(400, "bad_request", "seeds must be a non-empty list")
            seeds = [int(s) for s in seeds]
        else:
            seeds = default_seeds(int(body.get("n_seeds", 20)), int(body.get("base_seed", 42)))
        try:
            configs = _model_configs(body.get("model_configs"))
        except (TypeError, ValueError) as exc:
            return _error(400, "bad_request", f"bad model_configs: {exc}")

        name, text = ws.dataset_file_texts(stored)[0]
        ds = derive_risk_labels(load_tabular(text))
        run_id, run_dir = ws.new_run("train", {"dataset_id": dataset_id, "seeds": seeds})
        report = run_benchmark(ds, configs, seeds)
        ws.write_run_artifact(run_id, "report.json", report.to_json())
        ws.write_run_artifact(run_id, "report.csv", report.to_csv())
        from .evaluation import SplitSpec, split as _split, _train_regressor
        train_part, _ = _split(ds, SplitSpec(seed=seeds[0]))
        model_files = []
        for kind, cfg in configs:
            if kind == "logistic":
                continue
            model = _train_regressor(kind, cfg, train_part, seeds[0])
            fname = f"model_{kind}.json"
            ws.write_run_artifact(run_id, fname, model_to_json(model))
            model_files.append(fname)
        ws.finish_run(run_id, ["report.json", "report.csv"] + model_files)
        return {"run_id": run_id}

    @app.get("/api/v1/runs/{run_id}/report")
    def run_report(run_id: str):
        manifest = ws.get_run(run_id)
        if manifest is None:
            return _error(404, "not_found", f"run {run_id} not found")
        if manifest["status"] != "finished":
            return _error(400, "bad_request", f"run {run_id} is {manifest['status']}")
        payload = ws.run_artifact(run_id, "report.json")
        return Response(content=payload, media_type="application/json")

    @app.post("/api/v1/simulate")
    async def simulate(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"invalid JSON body: {exc}")
        try:
            payload = _simulate_payload(body)
        except ScenarioValidationError as exc:
            return _error(422, "validation_failed", "scenario violates feasible ranges",
                          exc.violations)
        except (FormatError, TypeError, ValueError, KeyError) as exc:
            return _error(400, "bad_request", str(exc))
        except CalibrationError as exc:
            return _error(422, "validation_failed", str(exc), {"residual": exc.residual})
        payload.pop("_named")
        payload.pop("_outcomes")
        return payload

    @app.post("/api/v1/overlay")
    async def overlay(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"invalid JSON body: {exc}")
        stored = ws.get_dataset(body.get("cgm_dataset_id", ""))
        if stored is None:
            return _error(404, "not_found", "CGM dataset not found")
        if not stored.kind.startswith("cgm"):
            return _error(400, "bad_request", "overlay needs a CGM dataset")
        corpus = _load_cgm_corpus(ws, stored)
        patient_id = body.get("patient_id")
        series = next((s for s in corpus if s.patient_id == patient_id), corpus[0])
        window = impute_gaps(resample(series, 5.0), "linear")
        try:
            anchor = datetime.fromisoformat(body["anchor"])
            scenarios = [scenario_from_dict(s) for s in body.get("scenarios", [])]
            if not scenarios:
                return _error(400, "bad_request", "scenario list is empty")
            params = _resolve_params(body)
            overlays = overlay_counterfactual(window, anchor, params, scenarios)
        except ScenarioValidationError as exc:
            return _error(422, "validation_failed", str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return _error(400, "bad_request", str(exc))
        return {
            "patient_id": series.patient_id,
            "window_start": window.records[0].timestamp.isoformat(),
            "params": params.to_dict(),
            "trajectories": [
                {"label": label, "t_min": traj.t_grid.tolist(), "glucose": traj.glucose.tolist()}
                for label, traj in overlays
            ],
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _validate_dataset(kind: str, items: list[tuple[str, str]]) -> int:
    count = 0
    for name, text in items:
        if kind == "tabular":
            count += load_tabular(text).n_rows
        elif kind == "cgm-xml":
            count += sum(len(s) for s in parse_cgm_xml(text.encode()))
        else:
            count += len(parse_cgm_csv(text))
    return count


def _load_cgm_corpus(ws: Workspace, stored) -> list:
    corpus = []
    for name, text in ws.dataset_file_texts(stored):
        if stored.kind == "cgm-xml":
            corpus.extend(parse_cgm_xml(text.encode()))
        else:
            corpus.append(parse_cgm_csv(text, patient_id=Path(name).stem))
    corpus.sort(key=lambda s: s.patient_id)
    return corpus


def _model_configs(raw) -> list[tuple[str, object]] | None:
    if raw is None:
        return None
    configs = []
    for entry in raw:
        kind = entry["kind"]
        rest = {k: v for k, v in entry.items() if k != "kind"}
        if kind == "linear":
            configs.append(("linear", None))
        else:
            cfg_type = MODEL_CONFIG_TYPES[kind]
            configs.append((kind, cfg_type(**rest)))
    return configs
