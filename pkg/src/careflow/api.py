"""HTTP service wrapping fits, simulation runs and staffing evaluation.

Routes (all JSON):

    POST /api/fit-los            fit the stay model to an uploaded resident CSV
    POST /api/fit-arrivals       fit an arrival count model, with GOF test
    POST /api/runs               submit a simulation config; returns 202 + run_id
    GET  /api/runs               list run records
    GET  /api/runs/{id}          one run record (poll until status is "done")
    GET  /api/runs/{id}/daily    summarized per-day series (409 until done)
    GET  /api/runs/{id}/report   evaluate staffing ratios on a finished run
    POST /api/sweep              evaluate a ratio range and suggest the best
    POST /api/runs/{id}/validate compare observed stays against a finished run
    POST /api/scenarios          save a what-if scenario
    GET  /api/scenarios          shipped presets plus saved scenarios

Errors: 400 for invalid configs or data (with a "field" hint when the message
identifies one), 404 for unknown ids, 409 for results requested before a run
finished, 500 with an opaque error id otherwise. Every run-scoped response
carries the config hash so results can be traced to exact inputs.

Simulations execute on a worker pool; POST /api/runs returns immediately and
clients poll the record. Persisted artifacts live in the run store
(CAREFLOW_DATA_DIR or ./careflow-data).
"""

from __future__ import annotations

import json
import logging
import tempfile
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .census import (
    chi_square_gof,
    fit_arrivals,
    load_residents,
    scenario_from_dict,
    scenario_to_dict,
)
from .config import data_path, load_preset_scenario, parse_config, resolve_includes
from .engine import run as run_simulation, summarize
from .errors import ConfigError, DataError
from .staffing import (
    CostModel,
    CostParams,
    StaffingStrategy,
    compare,
    cost_model_from_dict,
    suggest_ratio,
)
from .store import RunStore
from .survival import fit as fit_los, kaplan_meier
from .validate import km_overlay, ks_two_sample

__all__ = ["create_app"]

log = logging.getLogger("careflow.api")

_SCENARIO_PRESET_NAMES = ("baseline", "S1", "S2", "S3")


def _error_body(message: str, field: str | None = None, error_id: str | None = None) -> dict:
    body: dict = {"error": {"message": message}}
    if field:
        body["error"]["field"] = field
    if error_id:
        body["error"]["id"] = error_id
    return body


def _field_hint(message: str) -> str | None:
    """Config/data errors are phrased "<field>: problem"; surface the field."""
    head, sep, _ = message.partition(": ")
    if sep and head and " " not in head and len(head) < 64:
        return head
    return None


def _default_cost_model() -> CostModel:
    payload = json.loads(data_path("cost_default.json").read_text(encoding="utf-8"))
    return cost_model_from_dict(payload)


def _residents_from_text(csv_text):
    """Round an uploaded CSV body through the file loader (shared row checks)."""
    if not isinstance(csv_text, str) or not csv_text.strip():
        raise ConfigError("csv: a non-empty resident CSV string is required")
    with tempfile.NamedTemporaryFile(
        "w", suffix=".csv", encoding="utf-8", newline="", delete=False
    ) as handle:
        handle.write(csv_text)
        tmp_path = Path(handle.name)
    try:
        return load_residents(tmp_path)
    finally:
        tmp_path.unlink(missing_ok=True)


def _parse_strategies(text: str) -> list[StaffingStrategy]:
    """Parse "CNA:20,LPN:25" into strategies."""
    strategies = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        ctype, sep, ratio_text = token.partition(":")
        if not sep:
            raise ConfigError(f"strategies: expected TYPE:RATIO, got {token!r}")
        try:
            ratio = int(ratio_text)
        except ValueError:
            raise ConfigError(f"strategies: ratio in {token!r} is not an integer") from None
        strategies.append(StaffingStrategy(caregiver_type=ctype, residents_per_staff=ratio))
    if not strategies:
        raise ConfigError("strategies: at least one TYPE:RATIO pair is required")
    return strategies


def _parse_cost_query(text: str | None) -> CostModel:
    """Parse "CNA:0.35:0.525:480,LPN:0.47:0.705:480" (day minutes optional)."""
    if not text:
        return _default_cost_model()
    model = _default_cost_model()
    types = dict(model.types)
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(
                f"cost: expected TYPE:REGULAR:TEMP[:DAY_MINUTES], got {token!r}"
            )
        try:
            params = CostParams(
                regular_wage_per_min=float(parts[1]),
                temp_wage_per_min=float(parts[2]),
                staff_day_minutes=float(parts[3]) if len(parts) == 4 else 480.0,
            )
        except ValueError as exc:
            raise ConfigError(f"cost: {token!r}: {exc}") from None
        types[parts[0]] = params
    return CostModel(types=types)


def _summary_payload(record, output, band: str, alpha: float) -> dict:
    frame = summarize(output, alpha=alpha)
    if band == "ci":
        pick = lambda s: (s.ci_lower, s.ci_upper)  # noqa: E731
    elif band == "percentile":
        pick = lambda s: (s.pct_lower, s.pct_upper)  # noqa: E731
    else:
        raise ConfigError("band: must be 'ci' or 'percentile'")

    def series(summary) -> dict:
        lower, upper = pick(summary)
        return {
            "mean": [float(v) for v in summary.mean],
            "lower": [float(v) for v in lower],
            "upper": [float(v) for v in upper],
        }

    return {
        "run_id": record.run_id,
        "config_hash": record.config_hash,
        "band": band,
        "alpha": alpha,
        "days": [int(d) for d in frame.days],
        "census": series(frame.census),
        "demand": {ctype: series(s) for ctype, s in frame.demand.items()},
    }


def create_app(
    store: RunStore | None = None,
    max_workers: int = 2,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service. A fresh RunStore is created from the environment
    when none is passed (useful for tests, which inject a tmp-dir store).
    When ui_dir points at a built admin-panel directory it is served at /,
    same-origin with the API routes."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(
            max_workers=max_workers, thread_name_prefix="careflow-run"
        )
        try:
            yield
        finally:
            app.state.executor.shutdown(wait=True, cancel_futures=True)

    app = FastAPI(title="careflow", version=__version__, lifespan=lifespan)
    app.state.store = store if store is not None else RunStore()
    app.state.futures = {}

    # -- error handling ----------------------------------------------------

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        message = str(exc)
        return JSONResponse(
            status_code=400, content=_error_body(message, field=_field_hint(message))
        )

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError):
        message = str(exc)
        return JSONResponse(
            status_code=400, content=_error_body(message, field=_field_hint(message))
        )

    @app.exception_handler(Exception)
    async def _internal_error(request: Request, exc: Exception):
        error_id = uuid.uuid4().hex[:12]
        log.exception("internal error %s on %s", error_id, request.url.path)
        return JSONResponse(
            status_code=500,
            content=_error_body("internal error", error_id=error_id),
        )

    # -- fits ---------------------------------------------------------------

    @app.post("/api/fit-los")
    def api_fit_los(payload: dict) -> dict:
        table = _residents_from_text(payload.get("csv"))
        tolerance = float(payload.get("tolerance", 1e-6))
        model = fit_los(table.dataset(), tolerance=tolerance)
        return {
            "dispositions": [
                {
                    "index": mu.index,
                    "label": mu.label,
                    "eta": model.params[mu].eta,
                    "sigma": model.params[mu].sigma,
                }
                for mu in model.dispositions
            ],
            "log_likelihood": model.log_likelihood,
            "iterations": model.iterations,
            "converged": model.converged,
            "n_observations": len(table.observations),
            "n_censored": sum(1 for obs in table.observations if obs.censored),
        }

    @app.post("/api/fit-arrivals")
    def api_fit_arrivals(payload: dict) -> dict:
        counts = payload.get("counts")
        if not isinstance(counts, list) or not counts:
            raise ConfigError("counts: a non-empty list of daily counts is required")
        family = payload.get("family", "negbinom")
        model = fit_arrivals(counts, family=family)
        result: dict = {"family": model.family, "mean_per_day": model.mean()}
        if model.family == "negbinom":
            result["r"] = model.r
            result["p"] = model.p
        else:
            result["lam"] = model.lam
        try:
            gof = chi_square_gof(counts, model)
            result["gof"] = {
                "statistic": gof.statistic,
                "p_value": gof.p_value,
                "dof": gof.dof,
                "bins": gof.bins,
            }
        except DataError as exc:
            result["gof"] = None
            result["gof_error"] = str(exc)
        return result

    # -- runs ----------------------------------------------------------------

    def _execute(run_id: str, config) -> None:
        store: RunStore = app.state.store
        try:
            store.update_status(run_id, "running")
            output = run_simulation(config)
            record = store.get_record(run_id)
            store.persist_run(record, output)
        except Exception as exc:  # recorded, not raised: worker thread
            log.exception("run %s failed", run_id)
            store.update_status(run_id, "failed", error=f"{type(exc).__name__}: {exc}")

    @app.post("/api/runs", status_code=202)
    def api_submit_run(payload: dict) -> dict:
        config = parse_config(payload, base_dir=data_path("."))
        store: RunStore = app.state.store
        record = store.create_run(config)
        future: Future = app.state.executor.submit(_execute, record.run_id, config)
        app.state.futures[record.run_id] = future
        return {
            "run_id": record.run_id,
            "status": record.status,
            "config_hash": record.config_hash,
        }

    @app.get("/api/runs")
    def api_list_runs() -> dict:
        store: RunStore = app.state.store
        return {"runs": [record.to_dict() for record in store.list_runs()]}

    def _record_or_http(run_id: str):
        store: RunStore = app.state.store
        record = store.get_record(run_id)
        if record is None:
            return None, JSONResponse(
                status_code=404, content=_error_body(f"unknown run {run_id!r}")
            )
        return record, None

    def _done_record_or_http(run_id: str):
        record, response = _record_or_http(run_id)
        if response is not None:
            return None, response
        if record.status != "done":
            return None, JSONResponse(
                status_code=409,
                content=_error_body(
                    f"run {run_id} is not done yet (status: {record.status})"
                ),
            )
        return record, None

    @app.get("/api/runs/{run_id}")
    def api_get_run(run_id: str):
        record, response = _record_or_http(run_id)
        if response is not None:
            return response
        return record.to_dict()

    @app.get("/api/runs/{run_id}/daily")
    def api_get_daily(run_id: str, band: str = "ci", alpha: float = 0.05):
        record, response = _done_record_or_http(run_id)
        if response is not None:
            return response
        store: RunStore = app.state.store
        output = store.load_output(run_id)
        return _summary_payload(record, output, band=band, alpha=alpha)

    @app.get("/api/runs/{run_id}/report")
    def api_get_report(run_id: str, strategies: str, cost: str | None = None):
        record, response = _done_record_or_http(run_id)
        if response is not None:
            return response
        store: RunStore = app.state.store
        output = store.load_output(run_id)
        report = compare(output, _parse_strategies(strategies), _parse_cost_query(cost))
        store.save_report(run_id, report)
        payload = report.to_dict()
        payload["run_id"] = run_id
        return payload

    @app.post("/api/sweep")
    def api_sweep(payload: dict) -> dict:
        run_id = payload.get("run_id")
        if not isinstance(run_id, str) or not run_id:
            raise ConfigError("run_id: required to sweep a finished run")
        record, response = _done_record_or_http(run_id)
        if response is not None:
            return response
        caregiver_type = payload.get("caregiver_type", "CNA")
        k_min = int(payload.get("k_min", 1))
        k_max = int(payload.get("k_max", 60))
        if not 1 <= k_min <= k_max:
            raise ConfigError("k_min/k_max: need 1 <= k_min <= k_max")
        cost_payload = payload.get("cost")
        cost = (
            cost_model_from_dict(cost_payload)
            if isinstance(cost_payload, dict)
            else _default_cost_model()
        )
        store: RunStore = app.state.store
        output = store.load_output(run_id)
        best, evaluations = suggest_ratio(
            output, caregiver_type, cost, k_min=k_min, k_max=k_max
        )
        return {
            "run_id": run_id,
            "config_hash": record.config_hash,
            "caregiver_type": caregiver_type,
            "suggested": best.to_dict(),
            "evaluations": [ev.to_dict() for ev in evaluations],
        }

    @app.post("/api/runs/{run_id}/validate")
    def api_validate_run(run_id: str, payload: dict):
        """Compare uploaded observed stays against the run's simulated stays.

        Two-sample KS on uncensored durations, a survival-curve overlay with
        its max vertical gap, and duration histograms on shared bins. All
        numbers are computed here so clients can display without re-deriving.
        """
        record, response = _done_record_or_http(run_id)
        if response is not None:
            return response
        table = _residents_from_text(payload.get("csv"))
        observed_t = np.array([obs.t_days for obs in table.observations])
        observed_events = np.array([not obs.censored for obs in table.observations])
        if not observed_events.any():
            raise DataError("csv: no uncensored stays to compare against the run")

        store: RunStore = app.state.store
        output = store.load_output(run_id)
        records = [r for rep in output.replications for r in rep.residents]
        sim_t = np.array([r.los_days for r in records])
        sim_events = np.array([not r.censored for r in records])
        if sim_t.size == 0 or not sim_events.any():
            raise DataError("run produced no completed stays to compare")

        observed_uncensored = observed_t[observed_events]
        sim_uncensored = sim_t[sim_events]
        ks = ks_two_sample(observed_uncensored, sim_uncensored)
        overlay = km_overlay(
            kaplan_meier(observed_t, observed_events),
            kaplan_meier(sim_t, sim_events),
        )
        edges = np.histogram_bin_edges(
            np.concatenate([observed_uncensored, sim_uncensored]), bins=24
        )
        observed_density, _ = np.histogram(observed_uncensored, bins=edges, density=True)
        sim_density, _ = np.histogram(sim_uncensored, bins=edges, density=True)
        return {
            "run_id": run_id,
            "config_hash": record.config_hash,
            "ks": {
                "statistic": ks.statistic,
                "p_value": ks.p_value,
                "n_observed": ks.n1,
                "n_simulated": ks.n2,
            },
            "overlay": {
                "times": [float(t) for t in overlay.times],
                "observed": [float(s) for s in overlay.survival_a],
                "simulated": [float(s) for s in overlay.survival_b],
                "max_gap": float(overlay.max_gap),
            },
            "histogram": {
                "bin_edges": [float(e) for e in edges],
                "observed_density": [float(d) for d in observed_density],
                "simulated_density": [float(d) for d in sim_density],
            },
        }

    # -- scenarios -------------------------------------------------------------

    @app.post("/api/scenarios", status_code=201)
    def api_save_scenario(payload: dict) -> dict:
        resolved = resolve_includes(payload, data_path("."))
        try:
            scenario = scenario_from_dict(resolved)
        except ValueError as exc:
            raise ConfigError(f"scenario: {exc}") from None
        if scenario.name in _SCENARIO_PRESET_NAMES:
            raise ConfigError(
                f"scenario: name {scenario.name!r} collides with a shipped preset"
            )
        store: RunStore = app.state.store
        store.save_scenario(scenario)
        return {"saved": scenario_to_dict(scenario)}

    @app.get("/api/scenarios")
    def api_list_scenarios() -> dict:
        store: RunStore = app.state.store
        entries = [
            {"source": "preset", **scenario_to_dict(load_preset_scenario(name))}
            for name in _SCENARIO_PRESET_NAMES
        ]
        entries.extend(
            {"source": "saved", **scenario_to_dict(sc)} for sc in store.list_scenarios()
        )
        return {"scenarios": entries}

    @app.get("/api/health")
    def api_health() -> dict:
        return {"status": "ok", "version": __version__}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so /api/* routes keep precedence
        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True), name="ui")

    return app
