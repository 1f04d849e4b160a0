"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Monte Carlo criteria run at 1e6 trials; expected values were computed
from closed forms and independent oracles (quadrature, exact enumeration)
before the engine was built, and are frozen here.
"""

import copy
import functools
import itertools
import json
import math
import time
from datetime import datetime, timezone

import numpy as np
import pytest
from scipy import stats

from airisk import calibration as cal
from airisk import engine, incidents, reporting
from airisk import scenarios as sc
from airisk.calibration import CalibrationInterval, calibrate_lognormal
from airisk.controls import Control, evaluate, rank
from airisk.errors import ValidationError
from airisk.taxonomy import Framework, LossCategory, load_registry

TRIALS = 1_000_000

# independently verified closed forms (quadrature / exact enumeration)
COMPOUND_MEAN = 72631.00534849327          # 2 * exp(10.5)
COMPOUND_VAR = 2.0 * math.exp(22.0)        # lambda * E[X^2]
EXACT_PMF = {0.0: 0.5, 100.0: 0.3, 200.0: 0.2}
EXACT_EAL = 70.0

CANONICAL_SUB_THREATS = {
    "Misuse": [
        "Prompt Injection", "LLM Jailbreaking", "Deepfake Generation",
        "Disinformation Operations", "Bot Abuse", "Shadow AI Usage",
        "Backdoor Attack (User-Side)",
    ],
    "Poisoning": [
        "Targeted Data Poisoning", "Model Backdooring", "Tainted Open-Source Models",
        "Logic Corruption", "Poisoned ML Libraries", "Label Flipping Attacks",
        "Gradient Manipulation", "Poisoned Data Augmentation",
    ],
    "Privacy": [
        "Model Inversion", "Membership Inference", "Personal Data Leakage",
        "Sensitive Data Leakage", "Inference Eavesdropping",
    ],
    "Adversarial": [
        "Evasion Attacks", "Adversarial Patch/Image", "Model Denial of Service (DoS)",
        "Query Flooding", "Adversarial Reprogramming", "Oracle/Extraction Attacks",
        "Universal Perturbations", "Adaptive Attacks",
    ],
    "Biases": [
        "Representational Harm", "Allocational Harm", "Data Imbalance Bias",
        "Proxy Discrimination", "Algorithmic Amplification",
    ],
    "Unreliable Outputs": [
        "Factual Hallucination", "Source Fabrication", "Logical Inconsistency",
        "Incorrect Summarization", "Unsafe Content Generation",
    ],
    "Drift": [
        "Concept Drift", "Data Distribution Drift", "Upstream Data Changes",
        "User Behavior Change", "Feedback Loop Drift",
    ],
    "Supply Chain": [
        "Compromised Pre-trained Model", "Vulnerable ML Framework",
        "Insecure Data Feeds/APIs", "Container Image Poisoning",
        "Compromised Annotation Tools",
    ],
    "IP Threat": [
        "Model Extraction/Theft", "Data Exfiltration", "Proprietary Logic Theft",
        "Hyperparameter Stealing", "Watermark Removal",
    ],
}
EXPECTED_COUNTS = (7, 8, 5, 8, 5, 5, 5, 5, 5)


def criterion(number, label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] criterion {number:2d} FAIL  {label}")
                raise
            print(f"[acceptance] criterion {number:2d} PASS  {label}")

        return wrapper

    return deco


def lognormal_scenario(scenario_id="crit3"):
    return sc.RiskScenario(
        id=scenario_id,
        title="compound reference scenario",
        sub_threat_id="prompt_injection",
        frequency=cal.Poisson(2.0),
        severities={LossCategory.LEGAL: cal.Lognormal(10.0, 1.0)},
    )


@criterion(1, "taxonomy integrity: 9 domains / 53 sub-threats, name-for-name")
def test_criterion_01_taxonomy_integrity(registry, registry_doc):
    start = time.perf_counter()
    assert len(registry.domains) == 9
    assert registry.sub_threat_count == 53
    assert tuple(len(d.sub_threats) for d in registry.domains) == EXPECTED_COUNTS
    for domain in registry.domains:
        expected = CANONICAL_SUB_THREATS[domain.name]
        assert [s.name for s in domain.sub_threats] == expected, domain.name

    mutated = copy.deepcopy(registry_doc)
    mutated["domains"][3]["sub_threats"][0]["id"] = "concept_drift"  # duplicate
    with pytest.raises(ValidationError) as exc:
        load_registry(json.dumps(mutated))
    assert any("concept_drift" in f.message for f in exc.value.findings)
    assert time.perf_counter() - start < 1.0


@criterion(2, "crosswalk fidelity: published regulatory pairings reproduced")
def test_criterion_02_crosswalk_fidelity(registry):
    start = time.perf_counter()

    def pairs(domain_id):
        return [(a.framework, a.reference) for a in registry.anchors_for(domain_id)]

    assert pairs("misuse") == [
        (Framework.NIST_AI_RMF, "GOVERN 1.5"),
        (Framework.NIST_AI_RMF, "MANAGE 2.3"),
    ]
    assert pairs("privacy") == [
        (Framework.NIST_AI_RMF, "MAP 1.2"),
        (Framework.NIST_AI_RMF, "MEASURE 2.7"),
    ]
    assert pairs("biases") == [
        (Framework.NIST_AI_RMF, "MEASURE 2.11"),
        (Framework.ISO_42001, "6.2.2"),
    ]
    assert pairs("poisoning") == [(Framework.ISO_42001, "6.3.1")]
    assert pairs("drift") == [(Framework.ISO_42001, "6.4.1")]
    assert time.perf_counter() - start < 1.0


@criterion(3, "compound-mean oracle: EAL within 1% of 2*exp(10.5) at 1e6 trials")
def test_criterion_03_compound_mean():
    start = time.perf_counter()
    trials = engine.simulate_scenario(lognormal_scenario(), TRIALS, 42)
    eal = float(trials.losses.mean())
    assert abs(eal - COMPOUND_MEAN) / COMPOUND_MEAN < 0.01, eal
    assert time.perf_counter() - start < 10.0


@criterion(4, "brute-force convolution: pmf within 3-sigma of exact, EAL near 70")
def test_criterion_04_brute_force_convolution():
    scenario = sc.RiskScenario(
        id="crit4",
        title="enumerable compound",
        sub_threat_id="prompt_injection",
        frequency=cal.EmpiricalCounts({0: 0.5, 1: 0.3, 2: 0.2}),
        severities={LossCategory.LEGAL: cal.PointMass(100.0)},
    )
    trials = engine.simulate_scenario(scenario, TRIALS, 11)
    values, counts = np.unique(trials.losses, return_counts=True)
    assert set(values) <= set(EXACT_PMF)
    for value, p in EXACT_PMF.items():
        observed = counts[values == value].sum() / TRIALS
        assert abs(observed - p) <= 3.0 * math.sqrt(p * (1 - p) / TRIALS), (value, observed)
    second_moment = sum(v * v * p for v, p in EXACT_PMF.items())
    eal_sigma = math.sqrt((second_moment - EXACT_EAL**2) / TRIALS)
    assert abs(float(trials.losses.mean()) - EXACT_EAL) <= 3.0 * eal_sigma


@criterion(5, "metric properties: VaR monotone, TVaR >= VaR, category split exact")
def test_criterion_05_metric_properties():
    scenario = sc.RiskScenario(
        id="crit5",
        title="two-category scenario",
        sub_threat_id="membership_inference",
        frequency=cal.Poisson(1.5),
        severities={
            LossCategory.CONFIDENTIALITY: cal.Lognormal(9.0, 1.2),
            LossCategory.LEGAL: cal.PERT(1_000.0, 20_000.0, 500_000.0),
        },
    )
    confidences = (0.5, 0.75, 0.9, 0.95, 0.99, 0.995)
    for seed in (1, 2, 3):
        m = engine.metrics(
            engine.simulate_scenario(scenario, 200_000, seed), confidences
        )
        ordered = [m.var[a] for a in confidences]
        assert ordered == sorted(ordered)
        for alpha in confidences:
            assert m.tvar[alpha] >= m.var[alpha]
        total = sum(m.per_category_eal.values())
        assert abs(total - m.eal) <= 1e-9 * m.eal


@criterion(6, "calibration round-trip at 1e-9, sigma scale-equivariance at 1e-12")
def test_criterion_06_calibration_round_trip():
    gen = np.random.default_rng(20260809)
    for _ in range(100):
        lower = float(10 ** gen.uniform(-1, 7))
        ratio = float(10 ** gen.uniform(0.01, 6))
        confidence = float(gen.uniform(0.5, 0.995))
        model = calibrate_lognormal(CalibrationInterval(lower, lower * ratio, confidence))
        tail = (1.0 - confidence) / 2.0
        dist = stats.lognorm(s=model.sigma, scale=math.exp(model.mu))
        assert abs(dist.ppf(tail) - lower) <= 1e-9 * lower
        assert abs(dist.ppf(1.0 - tail) - lower * ratio) <= 1e-9 * lower * ratio
        sigma_a = calibrate_lognormal(CalibrationInterval(100.0, 100.0 * ratio)).sigma
        sigma_b = calibrate_lognormal(CalibrationInterval(7.0, 7.0 * ratio)).sigma
        assert abs(sigma_a - sigma_b) <= 1e-12 * sigma_a


@criterion(7, "control linearity, exact zero-effect delta, permutation-stable rank")
def test_criterion_07_controls():
    scenario = lognormal_scenario("crit7")
    halver = Control(id="halver", name="frequency halver", frequency_reduction=0.5)
    evaluation = evaluate(halver, scenario, TRIALS, 42)
    assert evaluation.ale_after / evaluation.ale_before == pytest.approx(0.5, rel=0.02)

    noop = Control(id="noop", name="zero effect", annual_cost=1_000.0)
    zero = evaluate(noop, scenario, 100_000, 42)
    assert zero.ale_after == zero.ale_before  # exact under common random numbers
    assert zero.rosi == -1.0

    pool = [
        Control(id="a", name="a", frequency_reduction=0.5, annual_cost=10_000.0),
        Control(id="b", name="b", magnitude_reduction=0.5, annual_cost=10_000.0),
        Control(id="c", name="c", frequency_reduction=0.2, magnitude_reduction=0.2,
                annual_cost=2_000.0),
    ]
    expected = rank(pool, scenario, 100_000, 42)
    for perm in itertools.permutations(pool):
        assert rank(list(perm), scenario, 100_000, 42) == expected


@criterion(8, "determinism: byte-identical CSV across parallelism, reorder-stable")
def test_criterion_08_determinism(registry):
    scenarios = [
        lognormal_scenario("alpha"),
        sc.RiskScenario(
            id="beta", title="bounded scenario", sub_threat_id="concept_drift",
            frequency=cal.Bernoulli(0.7),
            severities={LossCategory.INTEGRITY: cal.PERT(10_000.0, 50_000.0, 200_000.0)},
        ),
        sc.RiskScenario(
            id="gamma", title="count-model scenario", sub_threat_id="evasion_attacks",
            frequency=cal.NegativeBinomial(mean=1.2, dispersion=0.8),
            severities={
                LossCategory.INTEGRITY: cal.Uniform(1_000.0, 30_000.0),
                LossCategory.AVAILABILITY: cal.EmpiricalSamples((500.0, 2_500.0, 40_000.0)),
            },
        ),
    ]
    portfolio = sc.Portfolio(
        id="crit8", scenarios=tuple(scenarios), taxonomy_version=registry.version
    )
    serial = sc.run_workflow(portfolio, registry, n_trials=200_000, seed=42, workers=1)
    threaded = sc.run_workflow(portfolio, registry, n_trials=200_000, seed=42, workers=4)
    assert engine.export_csv(serial.portfolio_trials) == engine.export_csv(
        threaded.portfolio_trials
    )
    for sid in ("alpha", "beta", "gamma"):
        assert engine.export_csv(serial.scenario_trials[sid]) == engine.export_csv(
            threaded.scenario_trials[sid]
        )

    reordered = sc.Portfolio(
        id="crit8", scenarios=tuple(reversed(scenarios)), taxonomy_version=registry.version
    )
    shuffled = sc.run_workflow(reordered, registry, n_trials=200_000, seed=42)
    assert shuffled.portfolio_metrics == serial.portfolio_metrics
    assert shuffled.reserve == serial.reserve
    for sid in ("alpha", "beta", "gamma"):
        assert shuffled.scenario_metrics[sid] == serial.scenario_metrics[sid]


@criterion(9, "prevalence fixture: 81/36/7 of 133 with published shares")
def test_criterion_09_prevalence():
    start = time.perf_counter()
    report = incidents.prevalence(incidents.load_label_fixture())
    assert report.total == 133
    assert report.per_domain["misuse"].count == 81
    assert report.per_domain["unreliable_outputs"].count == 36
    assert report.per_domain["supply_chain"].count == 7
    assert report.per_domain["misuse"].share == pytest.approx(0.609, abs=5e-4)
    assert report.per_domain["unreliable_outputs"].share == pytest.approx(0.271, abs=5e-4)
    assert report.per_domain["supply_chain"].share == pytest.approx(0.053, abs=5e-4)
    # the shares round to the published 61 / 27 / 5 percent
    assert round(report.per_domain["misuse"].share * 100) == 61
    assert round(report.per_domain["unreliable_outputs"].share * 100) == 27
    assert round(report.per_domain["supply_chain"].share * 100) == 5
    assert time.perf_counter() - start < 1.0


@criterion(10, "report determinism under fixed clock; json round-trips")
def test_criterion_10_report_determinism(registry):
    portfolio = sc.Portfolio(
        id="crit10", scenarios=(lognormal_scenario("only"),),
        taxonomy_version=registry.version,
    )
    result = sc.run_workflow(portfolio, registry, n_trials=50_000, seed=42)
    clock = lambda: datetime(2026, 2, 2, 8, 30, tzinfo=timezone.utc)
    report = reporting.build_report(portfolio, registry, result, clock=clock)
    report_again = reporting.build_report(portfolio, registry, result, clock=clock)
    for fmt in reporting.FORMATS:
        assert reporting.render(report, fmt) == reporting.render(report_again, fmt)
    payload = reporting.render(report, "json")
    assert reporting.parse_report(payload) == report
