#!/usr/bin/env python3
"""Capture real API responses as fixtures for the workbench test suite.

The what-if fixture toggles a frequency_reduction=0.5 control on the
Poisson(2) x Lognormal(10, 1) reference scenario at 1e6 trials; the workbench
tests assert the displayed delta EAL sits within 2% of half the baseline and
is byte-equal to the response field.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from airisk.api import create_app

OUT = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"

PORTFOLIO = {
    "schema_version": "1",
    "id": "workbench-demo",
    "taxonomy_version": "1.0.0",
    "eu_high_risk": False,
    "scenarios": [
        {
            "id": "reference",
            "title": "Prompt injection via public API",
            "sub_threat_id": "prompt_injection",
            "narrative": "External actor submits crafted prompts.",
            "exposure_note": "Internet-facing chat endpoint.",
            "frequency": {"type": "poisson", "rate": 2.0},
            "severities": {"Legal": {"type": "lognormal", "mu": 10.0, "sigma": 1.0}},
            "controls": [
                {
                    "id": "rate-halver",
                    "name": "Request throttling",
                    "frequency_reduction": 0.5,
                    "magnitude_reduction": 0.0,
                    "annual_cost": 5000.0,
                    "applicable_domains": [],
                },
                {
                    "id": "noop",
                    "name": "Paper policy",
                    "frequency_reduction": 0.0,
                    "magnitude_reduction": 0.0,
                    "annual_cost": 1000.0,
                    "applicable_domains": [],
                },
            ],
            "currency_code": "USD",
        }
    ],
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app())
    assert client.post("/v1/portfolios", json=PORTFOLIO).status_code == 201

    taxonomy = client.get("/v1/taxonomy")
    (OUT / "taxonomy.json").write_bytes(taxonomy.content)

    simulate = client.post(
        "/v1/portfolios/workbench-demo/simulate",
        json={"trials": 200_000, "seed": 42, "confidences": [0.5, 0.9, 0.95, 0.99]},
    )
    assert simulate.status_code == 200
    (OUT / "simulate.json").write_bytes(simulate.content)

    whatif = client.post(
        "/v1/portfolios/workbench-demo/whatif",
        json={
            "scenario_id": "reference",
            "trials": 1_000_000,
            "seed": 42,
            "confidences": [0.5, 0.95],
            "controls": [{"id": "rate-halver", "enabled": True}],
        },
    )
    assert whatif.status_code == 200
    (OUT / "whatif_halving.json").write_bytes(whatif.content)

    zero = client.post(
        "/v1/portfolios/workbench-demo/whatif",
        json={
            "scenario_id": "reference",
            "trials": 100_000,
            "seed": 42,
            "confidences": [0.5, 0.95],
            "controls": [{"id": "noop", "enabled": True}],
        },
    )
    assert zero.status_code == 200
    (OUT / "whatif_zero.json").write_bytes(zero.content)

    doc = json.loads(whatif.content)
    ratio = doc["delta"]["eal"] / (0.5 * doc["baseline"]["eal"])
    print(f"captured fixtures in {OUT}")
    print(f"delta/half-baseline ratio: {ratio:.4f}")


if __name__ == "__main__":
    main()
