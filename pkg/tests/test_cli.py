import json

import pytest

from airisk import calibration as cal
from airisk import scenarios as sc
from airisk.cli import main
from airisk.controls import Control
from airisk.taxonomy import LossCategory


@pytest.fixture
def portfolio_file(tmp_path, portfolio_factory, scenario_factory):
    def write(scenarios=None, name="portfolio.json", **kwargs):
        p = portfolio_factory(scenarios, **kwargs)
        path = tmp_path / name
        sc.save_portfolio(p, path)
        return path

    return write


def test_taxonomy_validate(capsys):
    assert main(["taxonomy", "validate"]) == 0
    out = capsys.readouterr().out
    assert "9 domains, 53 sub-threats" in out


def test_taxonomy_validate_rejects_mutated_registry(tmp_path, registry_doc, capsys):
    import copy

    doc = copy.deepcopy(registry_doc)
    doc["domains"][1]["sub_threats"][0]["id"] = "prompt_injection"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["taxonomy", "validate", "--registry", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "prompt_injection" in err


def test_taxonomy_list_filters(capsys):
    assert main(["taxonomy", "list", "--loss", "Confidentiality"]) == 0
    out = capsys.readouterr().out
    assert "privacy/membership_inference" in out
    assert "ip_threat/model_extraction_theft" in out
    assert "misuse/prompt_injection" not in out

    assert main(["taxonomy", "list", "--domain", "drift", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["id"] for r in rows] == [
        "concept_drift", "data_distribution_drift", "upstream_data_changes",
        "user_behavior_change", "feedback_loop_drift",
    ]


def test_calibrate_lognormal(capsys):
    assert main(["calibrate", "lognormal", "--low", "10000", "--high", "1000000"]) == 0
    out = capsys.readouterr().out
    assert "mu=11.5129" in out
    assert "sigma=1.3998" in out


def test_calibrate_lognormal_degenerate(capsys):
    assert main(["calibrate", "lognormal", "--low", "100", "--high", "100"]) == 1
    assert "exceed" in capsys.readouterr().err


def test_calibrate_lognormal_json(capsys):
    assert main([
        "calibrate", "lognormal", "--low", "10000", "--high", "1000000",
        "--format", "json",
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mu"] == pytest.approx(11.512925464970229, rel=1e-12)


def test_simulate_zero_portfolio_reserve_line(portfolio_file, scenario_factory, capsys):
    path = portfolio_file([scenario_factory("z", frequency=cal.Poisson(0.0))])
    assert main(["simulate", "--portfolio", str(path), "--trials", "2000"]) == 0
    out = capsys.readouterr().out
    reserve_line = [l for l in out.splitlines() if l.startswith("reserve")][0]
    assert "0.00" in reserve_line
    assert "seed=42" in reserve_line  # default seed echoed


def test_simulate_json_output(portfolio_file, capsys):
    path = portfolio_file()
    assert main([
        "simulate", "--portfolio", str(path), "--trials", "5000", "--seed", "9",
        "--format", "json",
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["seed"] == 9
    assert doc["n_trials"] == 5000
    assert doc["reserve"]["amount"] > 0


def test_simulate_env_seed_override(portfolio_file, capsys, monkeypatch):
    monkeypatch.setenv("AIRISK_SEED", "123")
    path = portfolio_file()
    assert main(["simulate", "--portfolio", str(path), "--trials", "1000",
                 "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 123


def test_simulate_invalid_portfolio_exits_1(portfolio_file, scenario_factory, capsys):
    path = portfolio_file([scenario_factory(frequency=cal.Poisson(-1.0))])
    assert main(["simulate", "--portfolio", str(path)]) == 1
    assert "invalid_frequency_model" in capsys.readouterr().err


def test_controls_rank_output(portfolio_file, scenario_factory, capsys):
    strong = Control(id="strong", name="s", frequency_reduction=0.6, annual_cost=1000.0)
    weak = Control(id="weak", name="w", frequency_reduction=0.1, annual_cost=5000.0)
    path = portfolio_file([scenario_factory("s1", controls=(weak, strong))])
    assert main([
        "controls", "rank", "--portfolio", str(path), "--scenario", "s1",
        "--trials", "20000",
    ]) == 0
    out = capsys.readouterr().out
    assert out.index("1. strong") < out.index("2. weak")


def test_incidents_classify(capsys):
    from airisk.incidents import bundled_synthetic_corpus_path

    assert main([
        "incidents", "classify", "--input", str(bundled_synthetic_corpus_path()),
    ]) == 0
    out = capsys.readouterr().out
    assert "syn-001  ->  misuse" in out
    assert "| misuse |" in out


def test_report_markdown_to_file(portfolio_file, tmp_path, capsys):
    path = portfolio_file()
    out_path = tmp_path / "report.md"
    assert main([
        "report", "--portfolio", str(path), "--format", "markdown",
        "--trials", "2000", "--out", str(out_path),
    ]) == 0
    content = out_path.read_text()
    assert "GOVERN 1.5" in content
    assert "seed 42" in content


def test_report_json_stdout(portfolio_file, capsys):
    path = portfolio_file()
    assert main([
        "report", "--portfolio", str(path), "--format", "json", "--trials", "1000",
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_trials"] == 1000
    assert doc["scenario_sections"][0]["domain_id"] == "misuse"


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing --portfolio
    assert exc.value.code == 2


def test_unknown_scenario_exits_1(portfolio_file, capsys):
    path = portfolio_file()
    assert main([
        "controls", "rank", "--portfolio", str(path), "--scenario", "ghost",
    ]) == 1
    assert "ghost" in capsys.readouterr().err
