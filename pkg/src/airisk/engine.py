"""Compound (frequency x severity) Monte Carlo simulation and risk metrics.

Annual loss per trial: draw an event count from the control-adjusted
frequency model; for each event, draw one severity per mapped loss category
(independent draws, summed). Per-category accumulators are kept so EAL can be
decomposed.

Determinism: trials are partitioned into fixed blocks of 65,536; block i uses
a generator derived from (seed, i) via numpy's SeedSequence spawn keys, and
draws happen in a fixed order (counts first, then categories in canonical
LossCategory order). Results are byte-identical at any parallelism degree.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from . import calibration, controls as controls_mod
from .errors import (
    EmptyPortfolio,
    InvalidConfidence,
    InvalidTrialCount,
    TrialCountMismatch,
)
from .taxonomy import LossCategory

if TYPE_CHECKING:  # pragma: no cover
    from .scenarios import RiskScenario

BLOCK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1

DEFAULT_CONFIDENCES = (0.50, 0.90, 0.95, 0.99)
EXCEEDANCE_GRID_POINTS = 200


@dataclass(frozen=True, eq=False)
class TrialSet:
    """Per-trial annual losses for one scenario (or an aggregated portfolio)."""

    losses: np.ndarray
    n_trials: int
    seed: int
    scenario_ids: tuple[str, ...]
    category_losses: Mapping[LossCategory, np.ndarray]

    def __post_init__(self):
        if len(self.losses) != self.n_trials:
            raise InvalidTrialCount(
                f"losses length {len(self.losses)} != n_trials {self.n_trials}"
            )
        if not np.all(np.isfinite(self.losses)) or np.any(self.losses < 0):
            raise ValueError("trial losses must be finite and non-negative")
        self.losses.setflags(write=False)
        for arr in self.category_losses.values():
            arr.setflags(write=False)


@dataclass(frozen=True)
class RiskMetrics:
    eal: float
    var: Mapping[float, float]
    tvar: Mapping[float, float]
    exceedance_curve: tuple[tuple[float, float], ...]
    per_category_eal: Mapping[LossCategory, float]
    zero_loss_probability: float


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=(block_index,))
    return np.random.default_rng(ss)


def _adjusted_models(scenario: "RiskScenario"):
    freq_factor, mag_factor = controls_mod.combined_factors(scenario.controls)
    frequency = calibration.scale_frequency(scenario.frequency, freq_factor)
    severities = {
        cat: calibration.scale_severity(model, mag_factor)
        for cat, model in scenario.severities.items()
    }
    return frequency, severities


def _simulate_block(frequency, severities, rng, size):
    counts = calibration.sample_counts(frequency, rng, size)
    total_events = int(counts.sum())
    trial_index = np.repeat(np.arange(size), counts)
    block_losses = np.zeros(size)
    per_category = {}
    # Canonical category order keeps draws independent of dict insertion order.
    for cat in LossCategory:
        if cat not in severities:
            continue
        if total_events:
            draws = calibration.sample_severities(severities[cat], rng, total_events)
            cat_losses = np.bincount(trial_index, weights=draws, minlength=size)
        else:
            cat_losses = np.zeros(size)
        per_category[cat] = cat_losses
        block_losses += cat_losses
    return block_losses, per_category


def simulate_scenario(
    scenario: "RiskScenario",
    n_trials: int,
    seed: int,
    workers: int = 1,
) -> TrialSet:
    """Simulate annual losses for one scenario.

    Attached controls are folded into the models before sampling. Fully
    deterministic given (scenario, n_trials, seed); `workers` only controls
    how many blocks run concurrently.
    """
    try:
        n_trials = int(n_trials)
    except (TypeError, ValueError):
        raise InvalidTrialCount(f"n_trials must be an integer, got {n_trials!r}") from None
    if n_trials < 1:
        raise InvalidTrialCount(f"n_trials must be >= 1, got {n_trials}")

    frequency, severities = _adjusted_models(scenario)
    categories = [cat for cat in LossCategory if cat in severities]
    n_blocks = math.ceil(n_trials / BLOCK_SIZE)

    def run_block(b: int):
        size = min(BLOCK_SIZE, n_trials - b * BLOCK_SIZE)
        return _simulate_block(frequency, severities, _block_rng(seed, b), size)

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, range(n_blocks)))
    else:
        results = [run_block(b) for b in range(n_blocks)]

    losses = np.concatenate([r[0] for r in results])
    category_losses = {
        cat: np.concatenate([r[1][cat] for r in results]) for cat in categories
    }
    return TrialSet(
        losses=losses,
        n_trials=n_trials,
        seed=seed,
        scenario_ids=(scenario.id,),
        category_losses=category_losses,
    )


def aggregate(portfolio: Sequence[TrialSet], seed: int | None = None) -> TrialSet:
    """Element-wise sum of trial losses across scenarios (independence).

    Trial sets must share n_trials and should come from independent seed
    streams. `seed` labels the result; defaults to the first set's seed.
    """
    if not portfolio:
        raise EmptyPortfolio("cannot aggregate an empty portfolio")
    n = portfolio[0].n_trials
    for ts in portfolio[1:]:
        if ts.n_trials != n:
            raise TrialCountMismatch(
                f"trial counts differ: {n} vs {ts.n_trials}"
            )
    if len(portfolio) == 1 and seed is None:
        return portfolio[0]

    losses = np.zeros(n)
    category_losses: dict[LossCategory, np.ndarray] = {}
    for ts in portfolio:
        losses = losses + ts.losses
        for cat in LossCategory:
            if cat in ts.category_losses:
                prev = category_losses.get(cat)
                arr = ts.category_losses[cat]
                category_losses[cat] = arr.copy() if prev is None else prev + arr
    scenario_ids = tuple(sid for ts in portfolio for sid in ts.scenario_ids)
    return TrialSet(
        losses=losses,
        n_trials=n,
        seed=portfolio[0].seed if seed is None else seed,
        scenario_ids=scenario_ids,
        category_losses=category_losses,
    )


def _order_statistic_index(alpha: float, n: int) -> int:
    # ceil(alpha * n), nudged so float noise cannot push an exact integer up.
    return max(1, math.ceil(alpha * n - n * 1e-12))


def metrics(
    trials: TrialSet,
    confidences: Sequence[float] = DEFAULT_CONFIDENCES,
) -> RiskMetrics:
    """EAL, VaR/TVaR at each confidence, exceedance curve, category split.

    VaR(a) is the ceiling order statistic (no interpolation); TVaR(a) is the
    mean of losses strictly above that order statistic's position, or VaR(a)
    itself when the position is the maximum.
    """
    for alpha in confidences:
        if not (0.0 < alpha < 1.0):
            raise InvalidConfidence(f"confidence must lie in (0, 1), got {alpha}")

    losses = trials.losses
    n = trials.n_trials
    ordered = np.sort(losses)
    var: dict[float, float] = {}
    tvar: dict[float, float] = {}
    for alpha in confidences:
        k = _order_statistic_index(alpha, n)
        v = float(ordered[k - 1])
        tail = ordered[k:]
        var[alpha] = v
        tvar[alpha] = float(tail.mean()) if tail.size else v

    positive = ordered[ordered > 0]
    if positive.size:
        thresholds = np.geomspace(positive[0], ordered[-1], EXCEEDANCE_GRID_POINTS)
        exceed_counts = n - np.searchsorted(ordered, thresholds, side="right")
        curve = tuple(
            (float(t), float(c) / n) for t, c in zip(thresholds, exceed_counts)
        )
    else:
        curve = ()

    per_category = {
        cat: float(arr.mean()) for cat, arr in trials.category_losses.items()
    }
    return RiskMetrics(
        eal=float(losses.mean()),
        var=var,
        tvar=tvar,
        exceedance_curve=curve,
        per_category_eal=per_category,
        zero_loss_probability=float((losses == 0).mean()),
    )


def export_csv(trials: TrialSet) -> bytes:
    """Audit export: header comments carry seed/trials/scenario ids, then one
    loss per line at full float precision. Byte-stable for identical inputs."""
    buf = io.StringIO()
    buf.write(f"# seed={trials.seed}\n")
    buf.write(f"# n_trials={trials.n_trials}\n")
    buf.write(f"# scenario_ids={';'.join(trials.scenario_ids)}\n")
    buf.write("loss\n")
    for x in trials.losses:
        buf.write(repr(float(x)))
        buf.write("\n")
    return buf.getvalue().encode("utf-8")
