import json

import pytest

from airisk import calibration as cal
from airisk.scenarios import Portfolio, RiskScenario
from airisk.taxonomy import LossCategory, load_bundled_registry


@pytest.fixture(scope="session")
def registry():
    return load_bundled_registry()


@pytest.fixture(scope="session")
def registry_doc():
    """Raw bundled registry document, for mutation tests and data oracles."""
    from airisk.taxonomy import bundled_registry_path

    return json.loads(bundled_registry_path().read_text(encoding="utf-8"))


@pytest.fixture
def scenario_factory(registry):
    def make(
        scenario_id="s1",
        sub_threat_id="prompt_injection",
        frequency=None,
        severities=None,
        controls=(),
        **kwargs,
    ):
        if frequency is None:
            frequency = cal.Poisson(2.0)
        if severities is None:
            severities = {LossCategory.LEGAL: cal.Lognormal(10.0, 1.0)}
        return RiskScenario(
            id=scenario_id,
            title=kwargs.pop("title", f"scenario {scenario_id}"),
            sub_threat_id=sub_threat_id,
            frequency=frequency,
            severities=severities,
            controls=tuple(controls),
            **kwargs,
        )

    return make


@pytest.fixture
def portfolio_factory(registry, scenario_factory):
    def make(scenarios=None, portfolio_id="p1", **kwargs):
        if scenarios is None:
            scenarios = (scenario_factory(),)
        return Portfolio(
            id=portfolio_id,
            scenarios=tuple(scenarios),
            taxonomy_version=kwargs.pop("taxonomy_version", registry.version),
            **kwargs,
        )

    return make
