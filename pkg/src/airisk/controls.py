"""Mitigating controls: frequency/magnitude reductions, ROI, and ranking.

Multiple controls stack multiplicatively (independent-effectiveness
assumption): effective frequency keeps prod(1 - frequency_reduction_i) of the
baseline, and every severity draw keeps prod(1 - magnitude_reduction_i).
Before/after comparisons use common random numbers, so a zero-effect control
produces exactly zero delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from . import calibration
from .errors import InapplicableControl

if TYPE_CHECKING:  # pragma: no cover
    from .scenarios import RiskScenario
    from .taxonomy import TaxonomyRegistry


@dataclass(frozen=True)
class Control:
    id: str
    name: str
    frequency_reduction: float = 0.0   # fraction of event frequency removed
    magnitude_reduction: float = 0.0   # fraction of each loss removed
    annual_cost: float = 0.0
    applicable_domains: frozenset[str] = frozenset()  # empty = universal

    def applies_to(self, domain_id: str) -> bool:
        return not self.applicable_domains or domain_id in self.applicable_domains


@dataclass(frozen=True)
class ControlEvaluation:
    control_id: str
    ale_before: float
    ale_after: float
    annual_cost: float
    net_benefit: float
    rosi: Optional[float]  # None when annual_cost == 0 (undefined)


def control_findings(control: Control) -> list[str]:
    out = []
    if not control.id:
        out.append("control id must be non-empty")
    for label, v in (
        ("frequency_reduction", control.frequency_reduction),
        ("magnitude_reduction", control.magnitude_reduction),
    ):
        if not (0.0 <= v <= 1.0):
            out.append(f"control {control.id!r}: {label} must lie in [0, 1], got {v}")
    if not (math.isfinite(control.annual_cost) and control.annual_cost >= 0):
        out.append(
            f"control {control.id!r}: annual_cost must be finite and >= 0, "
            f"got {control.annual_cost}"
        )
    return out


def combined_factors(controls: Iterable[Control]) -> tuple[float, float]:
    """(frequency retention, magnitude retention) for a control stack.

    Factors are sorted before multiplying so the float product is identical
    under any permutation of the control list.
    """
    freq = math.prod(sorted(1.0 - c.frequency_reduction for c in controls))
    mag = math.prod(sorted(1.0 - c.magnitude_reduction for c in controls))
    return freq, mag


def apply(
    controls: Sequence[Control],
    scenario: "RiskScenario",
    registry: "TaxonomyRegistry | None" = None,
) -> "RiskScenario":
    """Fold controls into a scenario's models; the original is unmodified.

    The returned scenario has the reductions baked into its frequency and
    severity models and an empty control list. When a registry is given, each
    control must be applicable to the scenario's domain (empty applicability
    means universal).
    """
    if registry is not None:
        domain = registry.domain_of(scenario.sub_threat_id)
        for c in controls:
            if not c.applies_to(domain.id):
                raise InapplicableControl(
                    f"control {c.id!r} does not apply to domain {domain.id!r}"
                )
    if not controls:
        return scenario
    freq_factor, mag_factor = combined_factors(controls)
    return replace(
        scenario,
        frequency=calibration.scale_frequency(scenario.frequency, freq_factor),
        severities={
            cat: calibration.scale_severity(model, mag_factor)
            for cat, model in scenario.severities.items()
        },
        controls=(),
    )


def evaluate(
    control: Control,
    scenario: "RiskScenario",
    n_trials: int,
    seed: int,
    registry: "TaxonomyRegistry | None" = None,
) -> ControlEvaluation:
    """ALE with and without the control under the same seed (common random
    numbers). rosi = (ALE reduction - cost) / cost, undefined for free controls."""
    from .engine import simulate_scenario

    baseline = simulate_scenario(scenario, n_trials, seed)
    treated = simulate_scenario(apply([control], scenario, registry), n_trials, seed)
    ale_before = float(baseline.losses.mean())
    ale_after = float(treated.losses.mean())
    net_benefit = ale_before - ale_after - control.annual_cost
    rosi = net_benefit / control.annual_cost if control.annual_cost > 0 else None
    return ControlEvaluation(
        control_id=control.id,
        ale_before=ale_before,
        ale_after=ale_after,
        annual_cost=control.annual_cost,
        net_benefit=net_benefit,
        rosi=rosi,
    )


def rank(
    controls: Sequence[Control],
    scenario: "RiskScenario",
    n_trials: int,
    seed: int,
    registry: "TaxonomyRegistry | None" = None,
) -> list[ControlEvaluation]:
    """Evaluations sorted by descending net benefit; ties broken by ascending
    annual cost, then id. Deterministic under control-list permutation."""
    evaluations = [evaluate(c, scenario, n_trials, seed, registry) for c in controls]
    evaluations.sort(key=lambda e: (-e.net_benefit, e.annual_cost, e.control_id))
    return evaluations


def control_to_doc(control: Control) -> dict:
    return {
        "id": control.id,
        "name": control.name,
        "frequency_reduction": control.frequency_reduction,
        "magnitude_reduction": control.magnitude_reduction,
        "annual_cost": control.annual_cost,
        "applicable_domains": sorted(control.applicable_domains),
    }


def control_from_doc(doc: dict) -> Control:
    return Control(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        frequency_reduction=float(doc.get("frequency_reduction", 0.0)),
        magnitude_reduction=float(doc.get("magnitude_reduction", 0.0)),
        annual_cost=float(doc.get("annual_cost", 0.0)),
        applicable_domains=frozenset(doc.get("applicable_domains", ())),
    )
