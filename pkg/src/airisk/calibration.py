"""Frequency and severity models, expert-interval calibration, and
taxonomy-driven distribution recommendation.

Model values are plain frozen dataclasses. Out-of-bounds parameters do not
raise at construction; ``model_findings`` reports them so document validation
can enumerate every problem. Sampling and moment evaluation refuse invalid
models with ModelParameterError.

Sampling takes an explicit numpy Generator; a model never owns random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np
from scipy import stats

from .errors import (
    DegenerateInterval,
    InvalidConfidence,
    ModelParameterError,
    NonPositiveBound,
)
from .taxonomy import ImpactProfile, SubThreat, TemporalPattern

PMF_TOLERANCE = 1e-9
# Classic PERT shape: Beta with lambda = 4 scaled to [min, max].
PERT_LAMBDA = 4.0


# --- frequency models --------------------------------------------------------

@dataclass(frozen=True)
class Poisson:
    rate: float  # events/year


@dataclass(frozen=True)
class NegativeBinomial:
    mean: float        # events/year
    dispersion: float  # > 0; variance = mean + mean^2/dispersion


@dataclass(frozen=True)
class Bernoulli:
    p: float  # probability the event materializes in the period


@dataclass(frozen=True)
class EmpiricalCounts:
    pmf: Mapping[int, float]  # count -> probability, sums to 1

    def __post_init__(self):
        object.__setattr__(self, "pmf", dict(self.pmf))

    def __eq__(self, other):
        return isinstance(other, EmpiricalCounts) and self.pmf == other.pmf

    def __hash__(self):
        return hash(tuple(sorted(self.pmf.items())))


FrequencyModel = Union[Poisson, NegativeBinomial, Bernoulli, EmpiricalCounts]


# --- severity models ---------------------------------------------------------

@dataclass(frozen=True)
class Lognormal:
    mu: float     # log-currency
    sigma: float  # >= 0


@dataclass(frozen=True)
class PERT:
    min: float
    mode: float
    max: float


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float


@dataclass(frozen=True)
class PointMass:
    value: float


@dataclass(frozen=True)
class EmpiricalSamples:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


SeverityModel = Union[Lognormal, PERT, Uniform, PointMass, EmpiricalSamples]

# Serialization tags; parameter names in documents match the field names.
_MODEL_TAGS = {
    Poisson: "poisson",
    NegativeBinomial: "negative_binomial",
    Bernoulli: "bernoulli",
    EmpiricalCounts: "empirical_counts",
    Lognormal: "lognormal",
    PERT: "pert",
    Uniform: "uniform",
    PointMass: "point_mass",
    EmpiricalSamples: "empirical_samples",
}
_TAG_TO_MODEL = {v: k for k, v in _MODEL_TAGS.items()}


def model_findings(model) -> list[str]:
    """Parameter-bound violations for a model, empty if valid."""
    out: list[str] = []
    if isinstance(model, Poisson):
        if not (math.isfinite(model.rate) and model.rate >= 0):
            out.append(f"poisson rate must be >= 0 and finite, got {model.rate}")
    elif isinstance(model, NegativeBinomial):
        if not (math.isfinite(model.mean) and model.mean >= 0):
            out.append(f"negative_binomial mean must be >= 0 and finite, got {model.mean}")
        if not (math.isfinite(model.dispersion) and model.dispersion > 0):
            out.append(
                f"negative_binomial dispersion must be > 0, got {model.dispersion}"
            )
    elif isinstance(model, Bernoulli):
        if not (0.0 <= model.p <= 1.0):
            out.append(f"bernoulli p must lie in [0, 1], got {model.p}")
    elif isinstance(model, EmpiricalCounts):
        if not model.pmf:
            out.append("empirical_counts pmf is empty")
        else:
            for k, p in model.pmf.items():
                if not (isinstance(k, int) and k >= 0):
                    out.append(f"empirical_counts support must be non-negative ints, got {k!r}")
                if p < 0:
                    out.append(f"empirical_counts probability for {k} is negative")
            total = sum(model.pmf.values())
            if abs(total - 1.0) > PMF_TOLERANCE:
                out.append(f"empirical_counts pmf sums to {total}, not 1")
    elif isinstance(model, Lognormal):
        if not math.isfinite(model.mu):
            out.append(f"lognormal mu must be finite, got {model.mu}")
        if not (math.isfinite(model.sigma) and model.sigma >= 0):
            out.append(f"lognormal sigma must be >= 0, got {model.sigma}")
    elif isinstance(model, PERT):
        if not (model.min <= model.mode <= model.max):
            out.append(
                f"pert requires min <= mode <= max, got ({model.min}, {model.mode}, {model.max})"
            )
        if model.min < 0:
            out.append(f"pert min must be >= 0, got {model.min}")
    elif isinstance(model, Uniform):
        if not (model.lo <= model.hi):
            out.append(f"uniform requires lo <= hi, got ({model.lo}, {model.hi})")
        if model.lo < 0:
            out.append(f"uniform lo must be >= 0, got {model.lo}")
    elif isinstance(model, PointMass):
        if not (math.isfinite(model.value) and model.value >= 0):
            out.append(f"point_mass value must be >= 0, got {model.value}")
    elif isinstance(model, EmpiricalSamples):
        if not model.values:
            out.append("empirical_samples needs at least one value")
        elif any(v < 0 or not math.isfinite(v) for v in model.values):
            out.append("empirical_samples values must be non-negative and finite")
    else:
        out.append(f"unknown model type {type(model).__name__}")
    return out


def _require_valid(model) -> None:
    problems = model_findings(model)
    if problems:
        raise ModelParameterError("; ".join(problems))


# --- calibration -------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationInterval:
    """Expert interval: losses fall inside [lower, upper] with the stated
    confidence, symmetric tails."""

    lower: float
    upper: float
    confidence: float = 0.90

    def __post_init__(self):
        if self.lower <= 0 or self.upper <= 0:
            raise NonPositiveBound(
                f"interval bounds must be positive, got ({self.lower}, {self.upper})"
            )
        if self.upper <= self.lower:
            raise DegenerateInterval(
                f"upper bound must exceed lower bound, got ({self.lower}, {self.upper})"
            )
        if not (0.0 < self.confidence < 1.0):
            raise InvalidConfidence(
                f"confidence must lie strictly inside (0, 1), got {self.confidence}"
            )


def calibrate_lognormal(interval: CalibrationInterval) -> Lognormal:
    """Fit a lognormal whose symmetric quantiles hit the interval bounds.

    mu = (ln lower + ln upper) / 2 and sigma = ln(upper/lower) / (2 z) with
    z the standard-normal quantile at 1 - (1 - confidence)/2, so the fitted
    distribution puts (1-confidence)/2 mass below `lower` and above `upper`.
    sigma depends only on the ratio upper/lower (scale equivariance).
    """
    z = float(stats.norm.ppf(1.0 - (1.0 - interval.confidence) / 2.0))
    mu = (math.log(interval.lower) + math.log(interval.upper)) / 2.0
    sigma = math.log(interval.upper / interval.lower) / (2.0 * z)
    return Lognormal(mu=mu, sigma=sigma)


# --- moments -----------------------------------------------------------------

def moments(model) -> tuple[float, float]:
    """Analytic (mean, variance) of a frequency or severity model."""
    _require_valid(model)
    if isinstance(model, Poisson):
        return model.rate, model.rate
    if isinstance(model, NegativeBinomial):
        m, k = model.mean, model.dispersion
        return m, m + m * m / k
    if isinstance(model, Bernoulli):
        return model.p, model.p * (1.0 - model.p)
    if isinstance(model, EmpiricalCounts):
        mean = sum(k * p for k, p in model.pmf.items())
        second = sum(k * k * p for k, p in model.pmf.items())
        return mean, second - mean * mean
    if isinstance(model, Lognormal):
        mu, s2 = model.mu, model.sigma ** 2
        mean = math.exp(mu + s2 / 2.0)
        var = (math.exp(s2) - 1.0) * math.exp(2.0 * mu + s2)
        return mean, var
    if isinstance(model, PERT):
        if model.max == model.min:
            return model.min, 0.0
        a, b = _pert_shape(model)
        span = model.max - model.min
        mean = model.min + span * a / (a + b)
        var = span * span * a * b / ((a + b) ** 2 * (a + b + 1.0))
        return mean, var
    if isinstance(model, Uniform):
        mean = (model.lo + model.hi) / 2.0
        return mean, (model.hi - model.lo) ** 2 / 12.0
    if isinstance(model, PointMass):
        return model.value, 0.0
    if isinstance(model, EmpiricalSamples):
        arr = np.asarray(model.values, dtype=float)
        return float(arr.mean()), float(arr.var())
    raise ModelParameterError(f"unknown model type {type(model).__name__}")


def _pert_shape(model: PERT) -> tuple[float, float]:
    span = model.max - model.min
    a = 1.0 + PERT_LAMBDA * (model.mode - model.min) / span
    b = 1.0 + PERT_LAMBDA * (model.max - model.mode) / span
    return a, b


# --- sampling ----------------------------------------------------------------

def sample_counts(model: FrequencyModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` event counts. Consumes the generator deterministically."""
    _require_valid(model)
    if isinstance(model, Poisson):
        if model.rate == 0:
            return np.zeros(size, dtype=np.int64)
        return rng.poisson(model.rate, size=size).astype(np.int64)
    if isinstance(model, NegativeBinomial):
        if model.mean == 0:
            return np.zeros(size, dtype=np.int64)
        k, m = model.dispersion, model.mean
        return rng.negative_binomial(k, k / (k + m), size=size).astype(np.int64)
    if isinstance(model, Bernoulli):
        return (rng.random(size) < model.p).astype(np.int64)
    if isinstance(model, EmpiricalCounts):
        support = np.array(sorted(model.pmf), dtype=np.int64)
        probs = np.array([model.pmf[int(k)] for k in support], dtype=float)
        probs = probs / probs.sum()  # remove the <= 1e-9 normalization slack
        return rng.choice(support, size=size, p=probs)
    raise ModelParameterError(f"{type(model).__name__} is not a frequency model")


def sample_severities(model: SeverityModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` per-event severities. Consumes the generator deterministically."""
    _require_valid(model)
    if isinstance(model, Lognormal):
        return rng.lognormal(model.mu, model.sigma, size=size)
    if isinstance(model, PERT):
        if model.max == model.min:
            return np.full(size, float(model.min))
        a, b = _pert_shape(model)
        return model.min + (model.max - model.min) * rng.beta(a, b, size=size)
    if isinstance(model, Uniform):
        return rng.uniform(model.lo, model.hi, size=size)
    if isinstance(model, PointMass):
        return np.full(size, float(model.value))
    if isinstance(model, EmpiricalSamples):
        return rng.choice(np.asarray(model.values, dtype=float), size=size)
    raise ModelParameterError(f"{type(model).__name__} is not a severity model")


def sample(model, rng: np.random.Generator):
    """Single draw from any model (scalar)."""
    if isinstance(model, (Poisson, NegativeBinomial, Bernoulli, EmpiricalCounts)):
        return int(sample_counts(model, rng, 1)[0])
    return float(sample_severities(model, rng, 1)[0])


# --- control scaling ---------------------------------------------------------

def scale_frequency(model: FrequencyModel, factor: float) -> FrequencyModel:
    """Thin event frequency by `factor` in [0, 1] (fraction retained).

    Scaling is exact for every family: Poisson/NegativeBinomial scale their
    rate/mean, Bernoulli scales p, and EmpiricalCounts gets the exact
    binomially-thinned pmf. factor == 1 returns the model unchanged.
    """
    if not (0.0 <= factor <= 1.0):
        raise ValueError(f"frequency factor must lie in [0, 1], got {factor}")
    if factor == 1.0:
        return model
    if isinstance(model, Poisson):
        return Poisson(rate=model.rate * factor)
    if isinstance(model, NegativeBinomial):
        return NegativeBinomial(mean=model.mean * factor, dispersion=model.dispersion)
    if isinstance(model, Bernoulli):
        return Bernoulli(p=model.p * factor)
    if isinstance(model, EmpiricalCounts):
        thinned: dict[int, float] = {}
        for k, p in model.pmf.items():
            for j in range(k + 1):
                w = math.comb(k, j) * factor ** j * (1.0 - factor) ** (k - j)
                thinned[j] = thinned.get(j, 0.0) + p * w
        return EmpiricalCounts(pmf=thinned)
    raise ModelParameterError(f"{type(model).__name__} is not a frequency model")


def scale_severity(model: SeverityModel, factor: float) -> SeverityModel:
    """Scale every severity draw by `factor` in [0, 1].

    Closed under each family (Lognormal shifts mu by ln factor); factor == 0
    collapses to PointMass(0) and factor == 1 returns the model unchanged.
    """
    if not (0.0 <= factor <= 1.0):
        raise ValueError(f"severity factor must lie in [0, 1], got {factor}")
    if factor == 1.0:
        return model
    if factor == 0.0:
        return PointMass(0.0)
    if isinstance(model, Lognormal):
        return Lognormal(mu=model.mu + math.log(factor), sigma=model.sigma)
    if isinstance(model, PERT):
        return PERT(min=model.min * factor, mode=model.mode * factor, max=model.max * factor)
    if isinstance(model, Uniform):
        return Uniform(lo=model.lo * factor, hi=model.hi * factor)
    if isinstance(model, PointMass):
        return PointMass(value=model.value * factor)
    if isinstance(model, EmpiricalSamples):
        return EmpiricalSamples(values=tuple(v * factor for v in model.values))
    raise ModelParameterError(f"{type(model).__name__} is not a severity model")


# --- recommendation ----------------------------------------------------------

@dataclass(frozen=True)
class Recommendation:
    """Distribution families (no parameters) suggested for a sub-threat."""

    frequency_family: type
    severity_family: type
    note: str = ""


_DEGRADATION_NOTE = (
    "Continuous degradation is quantified as a Bernoulli materialization per "
    "period; the severity captures the accumulated loss of a period in which "
    "the degradation bites. Continuous-time loss accrual is out of scope."
)


def recommend(sub_threat: SubThreat) -> Recommendation:
    """Pure function of (temporal_pattern, impact_profile).

    DiscreteEvent -> Poisson frequency; ContinuousDegradation -> Bernoulli per
    period. HeavyTailed -> Lognormal severity; Bounded -> PERT.
    """
    if sub_threat.temporal_pattern is TemporalPattern.DISCRETE_EVENT:
        freq, note = Poisson, ""
    else:
        freq, note = Bernoulli, _DEGRADATION_NOTE
    sev = Lognormal if sub_threat.impact_profile is ImpactProfile.HEAVY_TAILED else PERT
    return Recommendation(frequency_family=freq, severity_family=sev, note=note)


# --- document (de)serialization ------------------------------------------------

def model_to_doc(model) -> dict:
    """Serialize a model for scenario documents; field names are preserved."""
    tag = _MODEL_TAGS.get(type(model))
    if tag is None:
        raise ModelParameterError(f"unknown model type {type(model).__name__}")
    if isinstance(model, EmpiricalCounts):
        return {"type": tag, "pmf": {str(k): v for k, v in sorted(model.pmf.items())}}
    if isinstance(model, EmpiricalSamples):
        return {"type": tag, "values": list(model.values)}
    doc = {"type": tag}
    for name in model.__dataclass_fields__:
        doc[name] = getattr(model, name)
    return doc


def model_from_doc(doc: Mapping) -> FrequencyModel | SeverityModel:
    """Rebuild a model from its document form. Unknown tags raise KeyError."""
    tag = doc["type"]
    cls = _TAG_TO_MODEL[tag]
    params = {k: v for k, v in doc.items() if k != "type"}
    if cls is EmpiricalCounts:
        return EmpiricalCounts(pmf={int(k): float(v) for k, v in params["pmf"].items()})
    if cls is EmpiricalSamples:
        return EmpiricalSamples(values=tuple(params["values"]))
    return cls(**params)
