"""Risk scenarios and portfolios: the data backbone of the quantification
workflow, with validation-as-findings, file persistence, and the end-to-end
run that turns a portfolio into reserve figures.

Per-scenario seeds derive from a stable hash of the scenario id combined with
the master seed, so reordering scenarios in a portfolio cannot change any
metric.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Mapping, Sequence, Union

import jsonschema

from . import calibration, engine
from .calibration import FrequencyModel, SeverityModel, model_findings
from .controls import Control, control_findings, control_from_doc, control_to_doc
from .engine import DEFAULT_CONFIDENCES, RiskMetrics, TrialSet
from .errors import (
    Finding,
    SchemaError,
    UnknownId,
    ValidationFailed,
    errors_only,
)
from .taxonomy import LossCategory, TaxonomyRegistry

_CURRENCY_RE = re.compile(r"^[A-Z]{3}$")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RiskScenario:
    """A concrete, quantifiable risk statement tied to one sub-threat."""

    id: str
    title: str
    sub_threat_id: str
    frequency: FrequencyModel
    severities: Mapping[LossCategory, SeverityModel]
    narrative: str = ""
    exposure_note: str = ""
    controls: tuple[Control, ...] = ()
    currency_code: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "severities", dict(self.severities))
        object.__setattr__(self, "controls", tuple(self.controls))

    def __eq__(self, other):
        if not isinstance(other, RiskScenario):
            return NotImplemented
        return (
            self.id == other.id
            and self.title == other.title
            and self.sub_threat_id == other.sub_threat_id
            and self.frequency == other.frequency
            and self.severities == other.severities
            and self.narrative == other.narrative
            and self.exposure_note == other.exposure_note
            and self.controls == other.controls
            and self.currency_code == other.currency_code
        )

    __hash__ = None


@dataclass(frozen=True)
class Portfolio:
    id: str
    scenarios: tuple[RiskScenario, ...]
    taxonomy_version: str
    eu_high_risk: bool = False
    load_findings: tuple[Finding, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    def scenario(self, scenario_id: str) -> RiskScenario:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise UnknownId(f"unknown scenario id: {scenario_id!r}")


# --- validation ----------------------------------------------------------------

def validate_scenario(scenario: RiskScenario, registry: TaxonomyRegistry) -> list[Finding]:
    """Every violation as a finding; empty list means the scenario is valid."""
    findings: list[Finding] = []
    if not scenario.id:
        findings.append(Finding("empty_id", "scenario id must be non-empty"))

    domain = None
    try:
        domain = registry.domain_of(scenario.sub_threat_id)
    except UnknownId:
        findings.append(Finding(
            "unknown_sub_threat",
            f"sub-threat id {scenario.sub_threat_id!r} does not resolve in the registry",
            field="sub_threat_id",
        ))

    if not scenario.severities:
        findings.append(Finding(
            "empty_severities", "scenario must define at least one severity model",
            field="severities",
        ))
    if domain is not None:
        for cat in scenario.severities:
            if cat not in domain.loss_categories:
                findings.append(Finding(
                    "loss_category_not_mapped",
                    f"loss category {cat.value!r} is not mapped for domain {domain.id!r}",
                    field="severities",
                ))

    for msg in model_findings(scenario.frequency):
        findings.append(Finding("invalid_frequency_model", msg, field="frequency"))
    for cat, model in scenario.severities.items():
        for msg in model_findings(model):
            findings.append(Finding(
                "invalid_severity_model", f"{cat.value}: {msg}", field="severities",
            ))

    for control in scenario.controls:
        for msg in control_findings(control):
            findings.append(Finding("invalid_control", msg, field="controls"))
        if domain is not None and not control.applies_to(domain.id):
            findings.append(Finding(
                "inapplicable_control",
                f"control {control.id!r} does not apply to domain {domain.id!r}",
                field="controls",
            ))

    if not _CURRENCY_RE.match(scenario.currency_code):
        findings.append(Finding(
            "invalid_currency",
            f"currency_code must be a three-letter ISO 4217 code, got {scenario.currency_code!r}",
            field="currency_code",
        ))
    return findings


def validate_portfolio(portfolio: Portfolio, registry: TaxonomyRegistry) -> list[Finding]:
    findings: list[Finding] = []
    seen: set[str] = set()
    for s in portfolio.scenarios:
        if s.id in seen:
            findings.append(Finding(
                "duplicate_scenario_id", f"scenario id {s.id!r} appears more than once"
            ))
        seen.add(s.id)
        for f in validate_scenario(s, registry):
            findings.append(Finding(
                f.code, f"scenario {s.id!r}: {f.message}", f.severity, f.field
            ))
    if portfolio.taxonomy_version != registry.version:
        findings.append(Finding(
            "taxonomy_version_mismatch",
            f"portfolio pins taxonomy {portfolio.taxonomy_version!r} but the "
            f"loaded registry is {registry.version!r}",
            severity="warning",
        ))
    currencies = {s.currency_code for s in portfolio.scenarios}
    if len(currencies) > 1:
        findings.append(Finding(
            "mixed_currencies",
            f"portfolio mixes currencies {sorted(currencies)}; a portfolio is single-currency",
        ))
    return findings


# --- workflow -------------------------------------------------------------------

def derive_scenario_seed(master_seed: int, scenario_id: str) -> int:
    """Stable 64-bit per-scenario seed from (master seed, scenario id)."""
    payload = (master_seed & _MASK64).to_bytes(8, "big") + b":" + scenario_id.encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


@dataclass(frozen=True)
class WorkflowResult:
    portfolio_id: str
    taxonomy_version: str
    seed: int
    n_trials: int
    confidences: tuple[float, ...]
    scenario_metrics: Mapping[str, RiskMetrics]
    scenario_trials: Mapping[str, TrialSet]
    portfolio_trials: TrialSet
    portfolio_metrics: RiskMetrics
    reserve_confidence: float
    reserve: float
    warnings: tuple[Finding, ...] = ()


def run_workflow(
    portfolio: Portfolio,
    registry: TaxonomyRegistry,
    n_trials: int = 100_000,
    seed: int = 42,
    confidences: Sequence[float] = DEFAULT_CONFIDENCES,
    workers: int = 1,
) -> WorkflowResult:
    """Validate, simulate every scenario, aggregate, and set the reserve.

    The reserve is the portfolio VaR at the highest requested confidence.
    Raises ValidationFailed when any error-level finding is present.
    """
    findings = validate_portfolio(portfolio, registry)
    errors = errors_only(findings)
    if errors:
        raise ValidationFailed(errors)
    warnings = tuple(f for f in findings if not f.is_error())

    confidences = tuple(sorted(confidences))
    scenario_trials: dict[str, TrialSet] = {}
    scenario_metrics: dict[str, RiskMetrics] = {}
    for s in portfolio.scenarios:
        trials = engine.simulate_scenario(
            s, n_trials, derive_scenario_seed(seed, s.id), workers=workers
        )
        scenario_trials[s.id] = trials
        scenario_metrics[s.id] = engine.metrics(trials, confidences)

    # Summation in id-sorted order: reordering scenarios cannot perturb the
    # float sum, so portfolio metrics are byte-identical under permutation.
    portfolio_trials = engine.aggregate(
        [scenario_trials[sid] for sid in sorted(scenario_trials)], seed=seed
    )
    portfolio_metrics = engine.metrics(portfolio_trials, confidences)
    reserve_confidence = confidences[-1]
    return WorkflowResult(
        portfolio_id=portfolio.id,
        taxonomy_version=portfolio.taxonomy_version,
        seed=seed,
        n_trials=n_trials,
        confidences=confidences,
        scenario_metrics=scenario_metrics,
        scenario_trials=scenario_trials,
        portfolio_trials=portfolio_trials,
        portfolio_metrics=portfolio_metrics,
        reserve_confidence=reserve_confidence,
        reserve=portfolio_metrics.var[reserve_confidence],
        warnings=warnings,
    )


# --- persistence ----------------------------------------------------------------

def scenario_to_doc(scenario: RiskScenario) -> dict:
    return {
        "id": scenario.id,
        "title": scenario.title,
        "sub_threat_id": scenario.sub_threat_id,
        "narrative": scenario.narrative,
        "exposure_note": scenario.exposure_note,
        "frequency": calibration.model_to_doc(scenario.frequency),
        "severities": {
            cat.value: calibration.model_to_doc(model)
            for cat, model in scenario.severities.items()
        },
        "controls": [control_to_doc(c) for c in scenario.controls],
        "currency_code": scenario.currency_code,
    }


def scenario_from_doc(doc: dict) -> RiskScenario:
    return RiskScenario(
        id=doc["id"],
        title=doc.get("title", ""),
        sub_threat_id=doc["sub_threat_id"],
        narrative=doc.get("narrative", ""),
        exposure_note=doc.get("exposure_note", ""),
        frequency=calibration.model_from_doc(doc["frequency"]),
        severities={
            LossCategory(cat): calibration.model_from_doc(m)
            for cat, m in doc["severities"].items()
        },
        controls=tuple(control_from_doc(c) for c in doc.get("controls", ())),
        currency_code=doc.get("currency_code", "USD"),
    )


def portfolio_to_doc(portfolio: Portfolio) -> dict:
    return {
        "schema_version": "1",
        "id": portfolio.id,
        "taxonomy_version": portfolio.taxonomy_version,
        "eu_high_risk": portfolio.eu_high_risk,
        "scenarios": [scenario_to_doc(s) for s in portfolio.scenarios],
    }


def _portfolio_schema() -> dict:
    with resources.files("airisk.data").joinpath("portfolio.schema.json").open("rb") as fp:
        return json.load(fp)


def portfolio_from_doc(doc: dict, registry: TaxonomyRegistry | None = None) -> Portfolio:
    """Build a portfolio from an already-parsed document.

    The document must satisfy the portfolio JSON schema (SchemaError
    otherwise). Semantic problems (unknown sub-threats, bad parameters) are
    left to validate_portfolio; a taxonomy version mismatch against `registry`
    is recorded as a warning finding on the returned portfolio.
    """
    validator = jsonschema.Draft202012Validator(_portfolio_schema())
    schema_errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if schema_errors:
        msgs = "; ".join(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in schema_errors[:10]
        )
        raise SchemaError(f"portfolio document violates schema: {msgs}")

    try:
        scenarios = tuple(scenario_from_doc(s) for s in doc["scenarios"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"portfolio document has malformed scenarios: {exc}") from exc

    load_findings: tuple[Finding, ...] = ()
    if registry is not None and doc["taxonomy_version"] != registry.version:
        load_findings = (Finding(
            "taxonomy_version_mismatch",
            f"document pins taxonomy {doc['taxonomy_version']!r} but the loaded "
            f"registry is {registry.version!r}",
            severity="warning",
        ),)
    return Portfolio(
        id=doc["id"],
        scenarios=scenarios,
        taxonomy_version=doc["taxonomy_version"],
        eu_high_risk=doc.get("eu_high_risk", False),
        load_findings=load_findings,
    )


PortfolioSource = Union[str, bytes, Path, BinaryIO]


def load_portfolio(source: PortfolioSource, registry: TaxonomyRegistry | None = None) -> Portfolio:
    if isinstance(source, Path):
        raw = source.read_bytes()
    elif isinstance(source, (bytes, str)):
        raw = source
    else:
        raw = source.read()
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"portfolio document is not valid JSON: {exc}") from exc
    return portfolio_from_doc(doc, registry)


def save_portfolio(portfolio: Portfolio, target: Union[Path, BinaryIO]) -> None:
    data = json.dumps(portfolio_to_doc(portfolio), indent=2, sort_keys=True).encode("utf-8")
    if isinstance(target, Path):
        target.write_bytes(data)
    else:
        target.write(data)
