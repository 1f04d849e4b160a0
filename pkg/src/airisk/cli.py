"""Operator command line.

Exit codes: 0 success, 1 validation findings or data errors, 2 usage errors
(argparse). Environment overrides: AIRISK_REGISTRY (registry path) and
AIRISK_SEED (default seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import controls as controls_mod
from . import engine, incidents, reporting, scenarios, taxonomy
from .calibration import CalibrationInterval, calibrate_lognormal
from .errors import AiriskError, ValidationFailed

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class CliConfig:
    registry_path: Path | None
    n_trials: int
    seed: int
    confidences: tuple[float, ...]
    output_format: str
    verbosity: int


def _env_seed() -> int:
    raw = os.environ.get("AIRISK_SEED")
    return int(raw) if raw else DEFAULT_SEED


def _config_from(args: argparse.Namespace) -> CliConfig:
    registry = getattr(args, "registry", None) or os.environ.get("AIRISK_REGISTRY")
    return CliConfig(
        registry_path=Path(registry) if registry else None,
        n_trials=getattr(args, "trials", DEFAULT_TRIALS),
        seed=getattr(args, "seed", None) if getattr(args, "seed", None) is not None else _env_seed(),
        confidences=tuple(getattr(args, "confidences", None) or engine.DEFAULT_CONFIDENCES),
        output_format=getattr(args, "format", "text"),
        verbosity=getattr(args, "verbose", 0),
    )


def _load_registry(cfg: CliConfig) -> taxonomy.TaxonomyRegistry:
    if cfg.registry_path is not None:
        return taxonomy.load_registry(cfg.registry_path)
    return taxonomy.load_bundled_registry()


def _print_findings(findings, stream=None) -> None:
    stream = stream or sys.stderr
    for f in findings:
        print(f"{f.severity}: [{f.code}] {f.message}", file=stream)


# --- taxonomy -----------------------------------------------------------------

def cmd_taxonomy_validate(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    print(f"{len(registry.domains)} domains, {registry.sub_threat_count} sub-threats")
    print(f"taxonomy_version: {registry.version}")
    return 0


def cmd_taxonomy_list(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    subs = registry.query(
        lifecycle=taxonomy.LifecyclePhase(args.lifecycle) if args.lifecycle else None,
        loss_category=taxonomy.LossCategory(args.loss) if args.loss else None,
        temporal_pattern=taxonomy.TemporalPattern(args.temporal) if args.temporal else None,
    )
    if args.domain:
        registry.domain(args.domain)  # raises UnknownId
        subs = [s for s in subs if s.domain_id == args.domain]
    if cfg.output_format == "json":
        doc = [
            {
                "id": s.id,
                "name": s.name,
                "domain_id": s.domain_id,
                "temporal_pattern": s.temporal_pattern.value,
                "impact_profile": s.impact_profile.value,
            }
            for s in subs
        ]
        print(json.dumps(doc, indent=2))
    else:
        for s in subs:
            print(f"{s.domain_id}/{s.id}  {s.name}  "
                  f"[{s.temporal_pattern.value}, {s.impact_profile.value}]")
        print(f"{len(subs)} sub-threat(s)")
    return 0


# --- calibrate ------------------------------------------------------------------

def cmd_calibrate_lognormal(args) -> int:
    interval = CalibrationInterval(
        lower=args.low, upper=args.high, confidence=args.confidence
    )
    model = calibrate_lognormal(interval)
    if args.format == "json":
        print(json.dumps({"mu": model.mu, "sigma": model.sigma,
                          "confidence": args.confidence}))
    else:
        print(f"mu={model.mu:.6f}")
        print(f"sigma={model.sigma:.6f}")
    return 0


# --- simulate -------------------------------------------------------------------

def _metrics_lines(label: str, m: engine.RiskMetrics, currency: str) -> list[str]:
    lines = [f"{label}: EAL {m.eal:,.2f} {currency}"]
    for alpha in sorted(m.var):
        lines.append(
            f"{label}: VaR({alpha:g}) {m.var[alpha]:,.2f}  "
            f"TVaR({alpha:g}) {m.tvar[alpha]:,.2f}"
        )
    return lines


def cmd_simulate(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    portfolio = scenarios.load_portfolio(Path(args.portfolio), registry)
    _print_findings(portfolio.load_findings)
    result = scenarios.run_workflow(
        portfolio, registry, n_trials=cfg.n_trials, seed=cfg.seed,
        confidences=cfg.confidences,
    )
    _print_findings(result.warnings)
    currency = portfolio.scenarios[0].currency_code if portfolio.scenarios else "USD"
    if cfg.output_format == "json":
        doc = {
            "portfolio_id": result.portfolio_id,
            "seed": result.seed,
            "n_trials": result.n_trials,
            "taxonomy_version": result.taxonomy_version,
            "reserve": {
                "confidence": result.reserve_confidence,
                "amount": result.reserve,
            },
            "portfolio": _metrics_doc(result.portfolio_metrics),
            "scenarios": {
                sid: _metrics_doc(m) for sid, m in result.scenario_metrics.items()
            },
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for sid in result.scenario_metrics:
            for line in _metrics_lines(sid, result.scenario_metrics[sid], currency):
                print(line)
        for line in _metrics_lines("portfolio", result.portfolio_metrics, currency):
            print(line)
        print(
            f"reserve VaR({result.reserve_confidence:g}) = {result.reserve:,.2f} "
            f"{currency}  (seed={result.seed}, trials={result.n_trials})"
        )
    return 0


def _metrics_doc(m: engine.RiskMetrics) -> dict:
    return {
        "eal": m.eal,
        "var": {f"{a:g}": v for a, v in sorted(m.var.items())},
        "tvar": {f"{a:g}": v for a, v in sorted(m.tvar.items())},
        "zero_loss_probability": m.zero_loss_probability,
        "per_category_eal": {c.value: v for c, v in m.per_category_eal.items()},
    }


# --- controls ---------------------------------------------------------------------

def cmd_controls_rank(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    portfolio = scenarios.load_portfolio(Path(args.portfolio), registry)
    scenario = portfolio.scenario(args.scenario)
    if not scenario.controls:
        print(f"scenario {scenario.id!r} has no attached controls")
        return 0
    # Each attached control is evaluated on its own against the bare scenario.
    bare = replace(scenario, controls=())
    ranking = controls_mod.rank(
        list(scenario.controls), bare, cfg.n_trials, cfg.seed, registry
    )
    if cfg.output_format == "json":
        doc = {
            "seed": cfg.seed,
            "n_trials": cfg.n_trials,
            "scenario_id": scenario.id,
            "ranking": [
                {
                    "control_id": e.control_id,
                    "ale_before": e.ale_before,
                    "ale_after": e.ale_after,
                    "annual_cost": e.annual_cost,
                    "net_benefit": e.net_benefit,
                    "rosi": e.rosi,
                }
                for e in ranking
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"scenario {scenario.id}  (seed={cfg.seed}, trials={cfg.n_trials})")
        for i, e in enumerate(ranking, 1):
            rosi = "n/a" if e.rosi is None else f"{e.rosi:.2f}"
            print(
                f"{i}. {e.control_id}: net benefit {e.net_benefit:,.2f}/yr  "
                f"(ALE {e.ale_before:,.2f} -> {e.ale_after:,.2f}, "
                f"cost {e.annual_cost:,.2f}, ROSI {rosi})"
            )
    return 0


# --- incidents ---------------------------------------------------------------------

def cmd_incidents_classify(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    records = incidents.ingest(Path(args.input))
    classified = incidents.classify_all(records, registry)
    report = incidents.prevalence(classified)
    if cfg.output_format == "json":
        doc = json.loads(incidents.prevalence_to_json(report))
        doc["records"] = [
            {
                "id": r.id,
                "classified_domain": r.classified_domain,
                "matched_keywords": list(r.matched_keywords),
            }
            for r in classified
        ]
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for r in classified:
            matched = ", ".join(r.matched_keywords) if r.matched_keywords else "-"
            print(f"{r.id}  ->  {r.classified_domain}  [{matched}]")
        print()
        print(incidents.prevalence_to_markdown(report), end="")
    return 0


# --- report -------------------------------------------------------------------------

def cmd_report(args) -> int:
    cfg = _config_from(args)
    registry = _load_registry(cfg)
    portfolio = scenarios.load_portfolio(Path(args.portfolio), registry)
    _print_findings(portfolio.load_findings)
    result = scenarios.run_workflow(
        portfolio, registry, n_trials=cfg.n_trials, seed=cfg.seed,
        confidences=cfg.confidences,
    )
    evaluations = []
    if not args.skip_controls:
        for s in portfolio.scenarios:
            if not s.controls:
                continue
            bare = replace(s, controls=())
            evaluations.extend(
                controls_mod.rank(list(s.controls), bare, cfg.n_trials, cfg.seed, registry)
            )
    report = reporting.build_report(portfolio, registry, result, evaluations)
    payload = reporting.render(report, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
        print(f"wrote {args.out} ({len(payload)} bytes)")
    else:
        sys.stdout.buffer.write(payload)
    return 0


# --- serve ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    cfg = _config_from(args)
    host, _, port = args.addr.rpartition(":")
    host = host or "127.0.0.1"
    app = create_app(
        registry=_load_registry(cfg),
        snapshot_dir=Path(args.snapshot_dir) if args.snapshot_dir else None,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    uvicorn.run(app, host=host, port=int(port))
    return 0


# --- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="airisk",
        description="Quantitative AI risk engine: taxonomy, simulation, controls, reporting.",
    )
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def add_registry(sp):
        sp.add_argument("--registry", help="registry JSON path (default: bundled)")

    def add_run_flags(sp):
        sp.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--confidences", type=float, nargs="+", default=None)

    tax = sub.add_parser("taxonomy", help="registry operations").add_subparsers(
        dest="taxonomy_command", required=True
    )
    tv = tax.add_parser("validate", help="load and fully validate the registry")
    add_registry(tv)
    tv.set_defaults(func=cmd_taxonomy_validate)
    tl = tax.add_parser("list", help="list sub-threats with optional filters")
    add_registry(tl)
    tl.add_argument("--domain")
    tl.add_argument("--lifecycle", choices=[e.value for e in taxonomy.LifecyclePhase])
    tl.add_argument("--loss", choices=[e.value for e in taxonomy.LossCategory])
    tl.add_argument("--temporal", choices=[e.value for e in taxonomy.TemporalPattern])
    tl.add_argument("--format", choices=["text", "json"], default="text")
    tl.set_defaults(func=cmd_taxonomy_list)

    cal = sub.add_parser("calibrate", help="fit distributions from expert intervals")
    cal_sub = cal.add_subparsers(dest="calibrate_command", required=True)
    cl = cal_sub.add_parser("lognormal", help="fit a lognormal to a confidence interval")
    cl.add_argument("--low", type=float, required=True)
    cl.add_argument("--high", type=float, required=True)
    cl.add_argument("--confidence", type=float, default=0.90)
    cl.add_argument("--format", choices=["text", "json"], default="text")
    cl.set_defaults(func=cmd_calibrate_lognormal)

    sim = sub.add_parser("simulate", help="run the portfolio workflow")
    add_registry(sim)
    add_run_flags(sim)
    sim.add_argument("--portfolio", required=True)
    sim.add_argument("--format", choices=["text", "json"], default="text")
    sim.set_defaults(func=cmd_simulate)

    ctl = sub.add_parser("controls", help="control analysis").add_subparsers(
        dest="controls_command", required=True
    )
    cr = ctl.add_parser("rank", help="rank a scenario's attached controls by net benefit")
    add_registry(cr)
    add_run_flags(cr)
    cr.add_argument("--portfolio", required=True)
    cr.add_argument("--scenario", required=True)
    cr.add_argument("--format", choices=["text", "json"], default="text")
    cr.set_defaults(func=cmd_controls_rank)

    inc = sub.add_parser("incidents", help="incident analysis").add_subparsers(
        dest="incidents_command", required=True
    )
    ic = inc.add_parser("classify", help="classify incidents and report prevalence")
    add_registry(ic)
    ic.add_argument("--input", required=True, help="CSV or JSON incident file")
    ic.add_argument("--format", choices=["text", "json"], default="text")
    ic.set_defaults(func=cmd_incidents_classify)

    rep = sub.add_parser("report", help="render the compliance report")
    add_registry(rep)
    add_run_flags(rep)
    rep.add_argument("--portfolio", required=True)
    rep.add_argument("--format", choices=list(reporting.FORMATS), default="json")
    rep.add_argument("--out", help="write to file instead of stdout")
    rep.add_argument("--skip-controls", action="store_true",
                     help="omit control evaluations from the report")
    rep.set_defaults(func=cmd_report)

    srv = sub.add_parser("serve", help="run the HTTP API")
    add_registry(srv)
    srv.add_argument("--addr", default="127.0.0.1:8000")
    srv.add_argument("--snapshot-dir", default=None)
    srv.add_argument("--static-dir", default=None,
                     help="directory of built workbench assets to serve")
    srv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailed as exc:
        _print_findings(exc.findings)
        return 1
    except AiriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
