"""Audit-ready report rendering.

Reports are built from workflow results with all presentation rounding done
up front (currency to 2 decimal places, probabilities to 4), so the JSON
rendering round-trips into a structurally equal report and every format shows
identical numbers. Rendering is deterministic: stable key ordering and a
clock hook for the timestamp.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Callable, Mapping, Optional, Sequence

from .controls import ControlEvaluation
from .engine import RiskMetrics
from .errors import UnsupportedFormat
from .scenarios import Portfolio, WorkflowResult
from .taxonomy import TaxonomyRegistry

FORMATS = ("json", "markdown", "csv-summary")

# Documentation-oriented anchors attached at portfolio level when the
# portfolio is flagged high-risk.
EU_HIGH_RISK_ANCHORS = ("Art. 9", "Art. 10", "Art. 72")


def _money(x: float) -> float:
    return round(float(x), 2)


def _prob(x: float) -> float:
    return round(float(x), 4)


def _conf_key(alpha: float) -> str:
    return f"{alpha:.4f}"


@dataclass(frozen=True)
class AnchorLine:
    framework: str
    reference: str
    note: str = ""


@dataclass(frozen=True)
class MetricsBlock:
    eal: float
    var: Mapping[str, float]
    tvar: Mapping[str, float]
    zero_loss_probability: float
    per_category_eal: Mapping[str, float]


@dataclass(frozen=True)
class ScenarioSection:
    scenario_id: str
    title: str
    narrative: str
    exposure_note: str
    sub_threat_id: str
    sub_threat_name: str
    domain_id: str
    domain_name: str
    metrics: MetricsBlock
    anchors: tuple[AnchorLine, ...]


@dataclass(frozen=True)
class ControlLine:
    control_id: str
    ale_before: float
    ale_after: float
    annual_cost: float
    net_benefit: float
    rosi: Optional[float]


@dataclass(frozen=True)
class ComplianceReport:
    generated_at: str
    taxonomy_version: str
    portfolio_id: str
    currency_code: str
    seed: int
    n_trials: int
    reserve_confidence: str
    reserve_amount: float
    portfolio_metrics: MetricsBlock
    scenario_sections: tuple[ScenarioSection, ...]
    control_evaluations: tuple[ControlLine, ...]
    eu_anchors: tuple[str, ...]


def _metrics_block(m: RiskMetrics) -> MetricsBlock:
    return MetricsBlock(
        eal=_money(m.eal),
        var={_conf_key(a): _money(v) for a, v in sorted(m.var.items())},
        tvar={_conf_key(a): _money(v) for a, v in sorted(m.tvar.items())},
        zero_loss_probability=_prob(m.zero_loss_probability),
        per_category_eal={
            cat.value: _money(v) for cat, v in sorted(
                m.per_category_eal.items(), key=lambda kv: kv[0].value
            )
        },
    )


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def build_report(
    portfolio: Portfolio,
    registry: TaxonomyRegistry,
    result: WorkflowResult,
    control_evaluations: Sequence[ControlEvaluation] = (),
    clock: Callable[[], datetime] = utc_now,
) -> ComplianceReport:
    """Assemble the full report; `clock` exists so tests can fix time."""
    sections = []
    for s in portfolio.scenarios:
        sub = registry.sub_threat(s.sub_threat_id)
        domain = registry.domain(sub.domain_id)
        anchors = tuple(
            AnchorLine(a.framework.value, a.reference, a.note)
            for a in registry.anchors_for(domain.id)
        )
        sections.append(ScenarioSection(
            scenario_id=s.id,
            title=s.title,
            narrative=s.narrative,
            exposure_note=s.exposure_note,
            sub_threat_id=sub.id,
            sub_threat_name=sub.name,
            domain_id=domain.id,
            domain_name=domain.name,
            metrics=_metrics_block(result.scenario_metrics[s.id]),
            anchors=anchors,
        ))
    controls = tuple(
        ControlLine(
            control_id=e.control_id,
            ale_before=_money(e.ale_before),
            ale_after=_money(e.ale_after),
            annual_cost=_money(e.annual_cost),
            net_benefit=_money(e.net_benefit),
            rosi=None if e.rosi is None else _prob(e.rosi),
        )
        for e in control_evaluations
    )
    currency = portfolio.scenarios[0].currency_code if portfolio.scenarios else "USD"
    return ComplianceReport(
        generated_at=clock().strftime("%Y-%m-%dT%H:%M:%SZ"),
        taxonomy_version=result.taxonomy_version,
        portfolio_id=portfolio.id,
        currency_code=currency,
        seed=result.seed,
        n_trials=result.n_trials,
        reserve_confidence=_conf_key(result.reserve_confidence),
        reserve_amount=_money(result.reserve),
        portfolio_metrics=_metrics_block(result.portfolio_metrics),
        scenario_sections=tuple(sections),
        control_evaluations=controls,
        eu_anchors=EU_HIGH_RISK_ANCHORS if portfolio.eu_high_risk else (),
    )


# --- rendering -----------------------------------------------------------------

def render(report: ComplianceReport, format: str) -> bytes:
    """Render to one of FORMATS. Same report, same bytes."""
    if format == "json":
        return _render_json(report)
    if format == "markdown":
        return _render_markdown(report)
    if format == "csv-summary":
        return _render_csv_summary(report)
    raise UnsupportedFormat(f"format must be one of {FORMATS}, got {format!r}")


def _render_json(report: ComplianceReport) -> bytes:
    return json.dumps(asdict(report), indent=2, sort_keys=True).encode("utf-8")


def _fmt_money(x: float) -> str:
    return f"{x:,.2f}"


def _render_markdown(report: ComplianceReport) -> bytes:
    out = io.StringIO()
    w = out.write
    w(f"# Risk report: {report.portfolio_id}\n\n")
    w(f"- generated_at: {report.generated_at}\n")
    w(f"- taxonomy_version: {report.taxonomy_version}\n")
    w(f"- seed: {report.seed}\n")
    w(f"- n_trials: {report.n_trials}\n")
    w(f"- currency: {report.currency_code}\n\n")
    w(f"## Reserve statement\n\n")
    w(
        f"Contingency reserve at confidence {report.reserve_confidence}: "
        f"**{_fmt_money(report.reserve_amount)} {report.currency_code}** "
        f"(seed {report.seed}, {report.n_trials} trials).\n\n"
    )
    if report.eu_anchors:
        w("High-risk portfolio documentation anchors (EU AI Act): ")
        w(", ".join(report.eu_anchors))
        w("\n\n")

    w("## Portfolio metrics\n\n")
    _write_metrics_md(w, report.portfolio_metrics)

    for s in report.scenario_sections:
        w(f"## Scenario: {s.scenario_id} — {s.title}\n\n")
        w(f"- domain: {s.domain_name} ({s.domain_id})\n")
        w(f"- sub-threat: {s.sub_threat_name} ({s.sub_threat_id})\n")
        if s.narrative:
            w(f"- narrative: {s.narrative}\n")
        if s.exposure_note:
            w(f"- exposure: {s.exposure_note}\n")
        w("\n")
        _write_metrics_md(w, s.metrics)
        if s.anchors:
            w("Regulatory anchors:\n\n")
            for a in s.anchors:
                note = f" — {a.note}" if a.note else ""
                w(f"- {a.framework}: {a.reference}{note}\n")
            w("\n")

    if report.control_evaluations:
        w("## Control evaluations\n\n")
        w("| control | ALE before | ALE after | annual cost | net benefit | ROSI |\n")
        w("| --- | ---: | ---: | ---: | ---: | ---: |\n")
        for c in report.control_evaluations:
            rosi = "n/a" if c.rosi is None else f"{c.rosi:.4f}"
            w(
                f"| {c.control_id} | {_fmt_money(c.ale_before)} | {_fmt_money(c.ale_after)} "
                f"| {_fmt_money(c.annual_cost)} | {_fmt_money(c.net_benefit)} | {rosi} |\n"
            )
        w("\n")
    return out.getvalue().encode("utf-8")


def _write_metrics_md(w, m: MetricsBlock) -> None:
    w(f"- EAL: {_fmt_money(m.eal)}\n")
    for key in m.var:
        w(f"- VaR({key}): {_fmt_money(m.var[key])}\n")
    for key in m.tvar:
        w(f"- TVaR({key}): {_fmt_money(m.tvar[key])}\n")
    w(f"- P(zero loss): {m.zero_loss_probability:.4f}\n")
    if m.per_category_eal:
        parts = ", ".join(
            f"{cat}: {_fmt_money(v)}" for cat, v in m.per_category_eal.items()
        )
        w(f"- EAL by loss category: {parts}\n")
    w("\n")


def _render_csv_summary(report: ComplianceReport) -> bytes:
    out = io.StringIO()
    confs = list(report.portfolio_metrics.var)
    writer = csv.writer(out, lineterminator="\n")
    out.write(f"# portfolio={report.portfolio_id} seed={report.seed} "
              f"n_trials={report.n_trials} taxonomy={report.taxonomy_version}\n")
    writer.writerow(
        ["section", "id", "domain_id", "eal"]
        + [f"var_{c}" for c in confs]
        + [f"tvar_{c}" for c in confs]
    )
    for s in report.scenario_sections:
        writer.writerow(
            ["scenario", s.scenario_id, s.domain_id, s.metrics.eal]
            + [s.metrics.var[c] for c in confs]
            + [s.metrics.tvar[c] for c in confs]
        )
    writer.writerow(
        ["portfolio", report.portfolio_id, "", report.portfolio_metrics.eal]
        + [report.portfolio_metrics.var[c] for c in confs]
        + [report.portfolio_metrics.tvar[c] for c in confs]
    )
    return out.getvalue().encode("utf-8")


# --- parsing (round-trip) --------------------------------------------------------

def parse_report(data: bytes) -> ComplianceReport:
    """Inverse of the JSON rendering."""
    doc = json.loads(data)

    def block(d: dict) -> MetricsBlock:
        return MetricsBlock(
            eal=d["eal"],
            var=dict(d["var"]),
            tvar=dict(d["tvar"]),
            zero_loss_probability=d["zero_loss_probability"],
            per_category_eal=dict(d["per_category_eal"]),
        )

    return ComplianceReport(
        generated_at=doc["generated_at"],
        taxonomy_version=doc["taxonomy_version"],
        portfolio_id=doc["portfolio_id"],
        currency_code=doc["currency_code"],
        seed=doc["seed"],
        n_trials=doc["n_trials"],
        reserve_confidence=doc["reserve_confidence"],
        reserve_amount=doc["reserve_amount"],
        portfolio_metrics=block(doc["portfolio_metrics"]),
        scenario_sections=tuple(
            ScenarioSection(
                scenario_id=s["scenario_id"],
                title=s["title"],
                narrative=s["narrative"],
                exposure_note=s["exposure_note"],
                sub_threat_id=s["sub_threat_id"],
                sub_threat_name=s["sub_threat_name"],
                domain_id=s["domain_id"],
                domain_name=s["domain_name"],
                metrics=block(s["metrics"]),
                anchors=tuple(AnchorLine(**a) for a in s["anchors"]),
            )
            for s in doc["scenario_sections"]
        ),
        control_evaluations=tuple(
            ControlLine(**c) for c in doc["control_evaluations"]
        ),
        eu_anchors=tuple(doc["eu_anchors"]),
    )
