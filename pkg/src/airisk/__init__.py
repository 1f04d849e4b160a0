"""airisk: quantitative AI risk engine.

Threat taxonomy registry, compound frequency/severity Monte Carlo simulation,
VaR-based reserve setting, control ROI ranking, incident prevalence analysis,
and audit-ready reporting.
"""

from .calibration import (
    Bernoulli,
    CalibrationInterval,
    EmpiricalCounts,
    EmpiricalSamples,
    Lognormal,
    NegativeBinomial,
    PERT,
    PointMass,
    Poisson,
    Uniform,
    calibrate_lognormal,
    moments,
    recommend,
    sample,
)
from .controls import Control, ControlEvaluation, apply, evaluate, rank
from .engine import RiskMetrics, TrialSet, aggregate, export_csv, metrics, simulate_scenario
from .errors import (
    AiriskError,
    Finding,
    SchemaError,
    UnknownId,
    ValidationError,
    ValidationFailed,
)
from .incidents import IncidentRecord, PrevalenceReport, classify, ingest, prevalence
from .reporting import ComplianceReport, build_report, parse_report, render
from .scenarios import (
    Portfolio,
    RiskScenario,
    load_portfolio,
    run_workflow,
    save_portfolio,
    validate_portfolio,
    validate_scenario,
)
from .taxonomy import (
    LifecyclePhase,
    LossCategory,
    TaxonomyRegistry,
    TemporalPattern,
    load_bundled_registry,
    load_registry,
)

__version__ = "0.1.0"
