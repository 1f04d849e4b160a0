"""HTTP JSON service for the analyst workbench.

Versioned under /v1. Request bodies validate against the same schemas as file
persistence; unknown fields are rejected. Error bodies always carry
{code, message, findings[]}. Simulation endpoints embed seed, n_trials and
taxonomy_version in every response; what-if runs use common random numbers
against the baseline, so a zero-effect toggle yields exactly zero delta.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import engine
from .calibration import CalibrationInterval, calibrate_lognormal
from .controls import Control, control_from_doc
from .engine import DEFAULT_CONFIDENCES, RiskMetrics
from .errors import (
    DegenerateInterval,
    Finding,
    InvalidConfidence,
    NonPositiveBound,
    SchemaError,
    UnknownId,
    ValidationFailed,
    errors_only,
)
from .scenarios import (
    Portfolio,
    portfolio_from_doc,
    portfolio_to_doc,
    run_workflow,
    validate_portfolio,
)
from .taxonomy import TaxonomyRegistry, load_bundled_registry

DEFAULT_TRIAL_CAP = 1_000_000


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, findings=()):
        self.status = status
        self.code = code
        self.message = message
        self.findings = list(findings)
        super().__init__(message)


def _finding_doc(f: Finding) -> dict:
    return {"code": f.code, "message": f.message, "severity": f.severity, "field": f.field}


def _error_response(status: int, code: str, message: str, findings=()) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "code": code,
            "message": message,
            "findings": [
                f if isinstance(f, dict) else _finding_doc(f) for f in findings
            ],
        },
    )


@dataclass
class _Entry:
    portfolio: Portfolio
    revision: int


class SessionStore:
    """In-memory portfolio store with optional atomic file snapshots."""

    def __init__(self, snapshot_dir: Optional[Path] = None):
        self._lock = threading.Lock()
        self._entries: dict[str, _Entry] = {}
        self._request_ids: dict[str, str] = {}
        self._put_results: dict[str, int] = {}
        self._snapshot_dir = snapshot_dir
        if snapshot_dir is not None:
            snapshot_dir.mkdir(parents=True, exist_ok=True)

    def _snapshot(self, portfolio: Portfolio) -> None:
        if self._snapshot_dir is None:
            return
        data = json.dumps(portfolio_to_doc(portfolio), indent=2, sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=self._snapshot_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fp:
                fp.write(data)
            os.replace(tmp, self._snapshot_dir / f"{portfolio.id}.json")
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def create(self, portfolio: Portfolio, request_id: Optional[str]) -> tuple[int, bool]:
        """Returns (revision, created). Retries with the same request id are
        answered from the first outcome instead of re-creating."""
        with self._lock:
            if request_id is not None and request_id in self._request_ids:
                existing = self._request_ids[request_id]
                return self._entries[existing].revision, False
            if portfolio.id in self._entries:
                raise ApiError(
                    409, "duplicate_id",
                    f"portfolio {portfolio.id!r} already exists",
                )
            self._entries[portfolio.id] = _Entry(portfolio, revision=1)
            if request_id is not None:
                self._request_ids[request_id] = portfolio.id
            self._snapshot(portfolio)
            return 1, True

    def get(self, portfolio_id: str) -> _Entry:
        with self._lock:
            if portfolio_id not in self._entries:
                raise ApiError(404, "unknown_id", f"unknown portfolio {portfolio_id!r}")
            return self._entries[portfolio_id]

    def put(
        self,
        portfolio: Portfolio,
        expected_revision: Optional[int],
        request_id: Optional[str] = None,
    ) -> int:
        with self._lock:
            replay_key = None if request_id is None else f"put:{portfolio.id}:{request_id}"
            if replay_key is not None and replay_key in self._put_results:
                return self._put_results[replay_key]
            entry = self._entries.get(portfolio.id)
            if entry is None:
                self._entries[portfolio.id] = _Entry(portfolio, revision=1)
                self._snapshot(portfolio)
                revision = 1
            else:
                if expected_revision is not None and expected_revision != entry.revision:
                    raise ApiError(
                        409, "revision_conflict",
                        f"expected revision {expected_revision}, store has {entry.revision}",
                    )
                entry.portfolio = portfolio
                entry.revision += 1
                self._snapshot(portfolio)
                revision = entry.revision
            if replay_key is not None:
                self._put_results[replay_key] = revision
            return revision


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    trials: int = 100_000
    seed: int = 42
    confidences: list[float] = Field(default_factory=lambda: list(DEFAULT_CONFIDENCES))


class CalibrateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lower: float
    upper: float
    confidence: float = 0.90


class ControlToggle(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: str
    enabled: bool = True


class WhatIfRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scenario_id: str
    trials: int = 100_000
    seed: int = 42
    confidences: list[float] = Field(default_factory=lambda: list(DEFAULT_CONFIDENCES))
    controls: list[ControlToggle] = Field(default_factory=list)
    extra_controls: list[dict] = Field(default_factory=list)


def _metrics_doc(m: RiskMetrics, include_curve: bool = True) -> dict:
    doc = {
        "eal": m.eal,
        "var": {f"{a:g}": v for a, v in sorted(m.var.items())},
        "tvar": {f"{a:g}": v for a, v in sorted(m.tvar.items())},
        "zero_loss_probability": m.zero_loss_probability,
        "per_category_eal": {c.value: v for c, v in m.per_category_eal.items()},
    }
    if include_curve:
        doc["exceedance_curve"] = [[t, p] for t, p in m.exceedance_curve]
    return doc


def create_app(
    registry: Optional[TaxonomyRegistry] = None,
    snapshot_dir: Optional[Path] = None,
    trial_cap: int = DEFAULT_TRIAL_CAP,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    registry = registry or load_bundled_registry()
    store = SessionStore(snapshot_dir)
    app = FastAPI(title="airisk API", version="1.0")

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message, exc.findings)

    @app.exception_handler(RequestValidationError)
    async def _schema_error(_req: Request, exc: RequestValidationError):
        findings = [
            {
                "code": "schema_violation",
                "message": e.get("msg", "invalid"),
                "severity": "error",
                "field": ".".join(str(p) for p in e.get("loc", ())),
            }
            for e in exc.errors()
        ]
        return _error_response(400, "schema_violation", "request body violates schema", findings)

    def _parse_portfolio(doc: dict) -> Portfolio:
        try:
            portfolio = portfolio_from_doc(doc, registry)
        except SchemaError as exc:
            raise ApiError(400, "schema_violation", str(exc)) from exc
        findings = validate_portfolio(portfolio, registry)
        errors = errors_only(findings)
        if errors:
            raise ApiError(
                422, "validation_failed", "portfolio failed semantic validation", errors
            )
        return portfolio

    def _check_trials(trials: int) -> None:
        if trials < 1:
            raise ApiError(422, "invalid_trials", f"trials must be >= 1, got {trials}")
        if trials > trial_cap:
            raise ApiError(
                422, "trial_cap_exceeded",
                f"trials {trials} exceeds the server cap of {trial_cap}",
            )

    def _check_confidences(confidences: list[float]) -> None:
        bad = [a for a in confidences if not (0.0 < a < 1.0)]
        if bad or not confidences:
            raise ApiError(
                422, "invalid_confidence",
                f"confidences must be non-empty and lie in (0, 1), got {confidences}",
            )

    # -- taxonomy ---------------------------------------------------------

    @app.get("/v1/taxonomy")
    def get_taxonomy():
        doc = registry.to_doc()
        return {
            "taxonomy_version": registry.version,
            "domains": doc["domains"],
            "crosswalk": doc["crosswalk"],
        }

    @app.get("/v1/taxonomy/domains/{domain_id}")
    def get_domain(domain_id: str):
        try:
            domain = registry.domain(domain_id)
        except UnknownId as exc:
            raise ApiError(404, "unknown_id", str(exc)) from exc
        doc = registry.to_doc()
        entry = next(d for d in doc["domains"] if d["id"] == domain_id)
        entry["anchors"] = doc["crosswalk"].get(domain.id, [])
        entry["taxonomy_version"] = registry.version
        return entry

    # -- calibration --------------------------------------------------------

    @app.post("/v1/calibrate/lognormal")
    def calibrate(req: CalibrateRequest):
        try:
            interval = CalibrationInterval(req.lower, req.upper, req.confidence)
        except DegenerateInterval as exc:
            raise ApiError(422, "degenerate_interval", str(exc), [
                Finding("degenerate_interval", str(exc), field="upper"),
            ]) from exc
        except NonPositiveBound as exc:
            raise ApiError(422, "non_positive_bound", str(exc), [
                Finding("non_positive_bound", str(exc), field="lower"),
            ]) from exc
        except InvalidConfidence as exc:
            raise ApiError(422, "invalid_confidence", str(exc), [
               Finding("invalid_confidence", str(exc), field="confidence"),
            ]) from exc
        model = calibrate_lognormal(interval)
        return {
            "lower": req.lower,
            "upper": req.upper,
            "confidence": req.confidence,
            "mu": model.mu,
            "sigma": model.sigma,
        }

    # -- portfolios ---------------------------------------------------------

    @app.post("/v1/portfolios", status_code=201)
    async def create_portfolio(
        request: Request,
        x_request_id: Optional[str] = Header(default=None),
    ):
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            raise ApiError(400, "schema_violation", f"body is not valid JSON: {exc}") from exc
        portfolio = _parse_portfolio(doc)
        revision, created = store.create(portfolio, x_request_id)
        return JSONResponse(
            status_code=201 if created else 200,
            content={
                "id": portfolio.id,
                "revision": revision,
                "taxonomy_version": registry.version,
                "findings": [_finding_doc(f) for f in portfolio.load_findings],
            },
        )

    @app.get("/v1/portfolios/{portfolio_id}")
    def get_portfolio(portfolio_id: str):
        entry = store.get(portfolio_id)
        return {
            "revision": entry.revision,
            "portfolio": portfolio_to_doc(entry.portfolio),
        }

    @app.put("/v1/portfolios/{portfolio_id}")
    async def put_portfolio(
        portfolio_id: str,
        request: Request,
        if_match: Optional[str] = Header(default=None),
        x_request_id: Optional[str] = Header(default=None),
    ):
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            raise ApiError(400, "schema_violation", f"body is not valid JSON: {exc}") from exc
        if doc.get("id") != portfolio_id:
            raise ApiError(
                422, "id_mismatch",
                f"body id {doc.get('id')!r} does not match path id {portfolio_id!r}",
            )
        portfolio = _parse_portfolio(doc)
        expected = int(if_match) if if_match is not None else None
        revision = store.put(portfolio, expected, x_request_id)
        return {"id": portfolio.id, "revision": revision,
                "taxonomy_version": registry.version}

    # -- simulation -----------------------------------------------------------

    @app.post("/v1/portfolios/{portfolio_id}/simulate")
    def simulate(portfolio_id: str, req: SimulateRequest):
        entry = store.get(portfolio_id)
        _check_trials(req.trials)
        _check_confidences(req.confidences)
        try:
            result = run_workflow(
                entry.portfolio, registry,
                n_trials=req.trials, seed=req.seed, confidences=req.confidences,
            )
        except ValidationFailed as exc:
            raise ApiError(
                422, "validation_failed", "portfolio failed validation", exc.findings
            ) from exc
        return {
            "portfolio_id": portfolio_id,
            "seed": result.seed,
            "n_trials": result.n_trials,
            "taxonomy_version": result.taxonomy_version,
            "confidences": list(result.confidences),
            "reserve": {
                "confidence": result.reserve_confidence,
                "amount": result.reserve,
            },
            "portfolio": _metrics_doc(result.portfolio_metrics),
            "scenarios": {
                sid: _metrics_doc(m, include_curve=False)
                for sid, m in result.scenario_metrics.items()
            },
        }

    @app.post("/v1/portfolios/{portfolio_id}/whatif")
    def whatif(portfolio_id: str, req: WhatIfRequest):
        entry = store.get(portfolio_id)
        _check_trials(req.trials)
        _check_confidences(req.confidences)
        try:
            scenario = entry.portfolio.scenario(req.scenario_id)
        except UnknownId as exc:
            raise ApiError(404, "unknown_id", str(exc)) from exc

        attached = {c.id: c for c in scenario.controls}
        enabled: list[Control] = []
        for toggle in req.controls:
            if toggle.id not in attached:
                raise ApiError(
                    422, "unknown_control",
                    f"control {toggle.id!r} is not attached to scenario {scenario.id!r}",
                )
            if toggle.enabled:
                enabled.append(attached[toggle.id])
        for doc in req.extra_controls:
            try:
                enabled.append(control_from_doc(doc))
            except (KeyError, TypeError, ValueError) as exc:
                raise ApiError(
                    400, "schema_violation", f"malformed extra control: {exc}"
                ) from exc

        # Baseline strips every control; common random numbers via same seed.
        baseline_scenario = replace(scenario, controls=())
        treated_scenario = replace(scenario, controls=tuple(enabled))
        confidences = sorted(req.confidences)
        baseline_trials = engine.simulate_scenario(baseline_scenario, req.trials, req.seed)
        treated_trials = engine.simulate_scenario(treated_scenario, req.trials, req.seed)
        baseline = engine.metrics(baseline_trials, confidences)
        treated = engine.metrics(treated_trials, confidences)

        annual_cost = sum(c.annual_cost for c in enabled)
        delta_eal = baseline.eal - treated.eal
        net_benefit = delta_eal - annual_cost
        rosi = net_benefit / annual_cost if annual_cost > 0 else None
        return {
            "portfolio_id": portfolio_id,
            "scenario_id": scenario.id,
            "seed": req.seed,
            "n_trials": req.trials,
            "taxonomy_version": registry.version,
            "enabled_controls": [c.id for c in enabled],
            "baseline": _metrics_doc(baseline),
            "treated": _metrics_doc(treated),
            "delta": {
                "eal": delta_eal,
                "var": {
                    f"{a:g}": baseline.var[a] - treated.var[a] for a in confidences
                },
            },
            "annual_cost": annual_cost,
            "net_benefit": net_benefit,
            "rosi": rosi,
        }

    if static_dir is not None and static_dir.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="workbench")

    return app
