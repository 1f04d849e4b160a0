import json

import pytest

from airisk import incidents
from airisk.errors import SchemaError
from airisk.incidents import (
    UNCLASSIFIED,
    IncidentRecord,
    classify,
    classify_all,
    ingest,
    load_label_fixture,
    prevalence,
)

CSV_HEADER = "id,date,title,description,source_url\n"


def test_ingest_empty_csv_with_header():
    assert ingest(CSV_HEADER) == []


def test_ingest_missing_description_names_row():
    data = CSV_HEADER + 'r1,2025-01-01,ok,"something happened",\n' + "r2,2025-01-02,bad,,\n"
    with pytest.raises(SchemaError) as exc:
        ingest(data)
    assert "row 3" in str(exc.value)


def test_ingest_missing_header_column():
    with pytest.raises(SchemaError):
        ingest("id,title\nr1,x\n")


def test_ingest_json_array():
    records = ingest(json.dumps([
        {"id": "j1", "description": "a data poisoning story"},
        {"id": "j2", "description": "nothing to see", "title": "t"},
    ]))
    assert [r.id for r in records] == ["j1", "j2"]
    assert records[0].classified_domain is None


def test_ingest_json_rejects_non_array():
    with pytest.raises(SchemaError):
        ingest(json.dumps({"id": "x"}))
    with pytest.raises(SchemaError):
        ingest("[{]")


def test_bundled_fixture_has_133_records():
    assert len(load_label_fixture()) == 133


def test_classify_prompt_injection_text(registry):
    # hand-scored: "prompt injection" hits the Misuse sub-threat name (2)
    # and "jailbreak" an auxiliary keyword (1); no other domain scores.
    r = classify(IncidentRecord(id="x", description="Prompt injection jailbreak reported"), registry)
    assert r.classified_domain == "misuse"
    assert "prompt injection" in r.matched_keywords
    assert "jailbreak" in r.matched_keywords


def test_classify_no_keywords_is_unclassified(registry):
    r = classify(IncidentRecord(id="x", description="quarterly earnings grew nicely"), registry)
    assert r.classified_domain == UNCLASSIFIED
    assert r.matched_keywords == ()


def test_classify_is_idempotent(registry):
    r = IncidentRecord(id="x", description="an adversarial patch confused the model")
    once = classify(r, registry)
    twice = classify(once, registry)
    assert once == twice


def test_classify_tie_breaks_by_registry_order(registry):
    # one auxiliary keyword each from poisoning and ip_threat; poisoning is
    # earlier in the registry so it wins the tie
    r = classify(
        IncidentRecord(id="x", description="data poisoning then exfiltration followed"),
        registry,
    )
    assert r.classified_domain == "poisoning"


def test_classify_matches_whole_phrases_only(registry):
    # "jailbreaking" must not match the keyword "jailbreak" as a substring
    r = classify(IncidentRecord(id="x", description="a jailbreaking attempt"), registry)
    assert "jailbreak" not in r.matched_keywords


def test_synthetic_corpus_classifications(registry):
    expected = {
        "syn-001": "misuse",
        "syn-002": "unreliable_outputs",
        "syn-003": "drift",
        "syn-004": "poisoning",
        "syn-005": "privacy",
        "syn-006": "adversarial",
        "syn-007": "supply_chain",
        "syn-008": "ip_threat",
        "syn-009": "biases",
        "syn-010": "misuse",
        "syn-011": UNCLASSIFIED,
        "syn-012": "unreliable_outputs",
        "syn-013": "drift",
        "syn-014": "adversarial",
    }
    records = classify_all(ingest(incidents.bundled_synthetic_corpus_path()), registry)
    got = {r.id: r.classified_domain for r in records}
    assert got == expected


def test_prevalence_reproduces_fixture_counts():
    report = prevalence(load_label_fixture())
    assert report.total == 133
    assert report.per_domain["misuse"].count == 81
    assert report.per_domain["unreliable_outputs"].count == 36
    assert report.per_domain["supply_chain"].count == 7
    assert report.per_domain["misuse"].share == pytest.approx(0.609, abs=5e-4)
    assert report.per_domain["unreliable_outputs"].share == pytest.approx(0.271, abs=5e-4)
    assert report.per_domain["supply_chain"].share == pytest.approx(0.053, abs=5e-4)
    assert report.coverage == 1.0
    assert report.unclassified.count == 0
    counted = sum(s.count for s in report.per_domain.values()) + report.unclassified.count
    assert counted == report.total
    shares = sum(s.share for s in report.per_domain.values()) + report.unclassified.share
    assert shares == pytest.approx(1.0, abs=1e-9)


def test_prevalence_empty_input():
    report = prevalence([])
    assert report.total == 0
    assert report.coverage == 1.0
    assert report.empty_input is True


def test_prevalence_single_domain():
    records = [
        IncidentRecord(id=str(i), description="", classified_domain="drift")
        for i in range(5)
    ]
    report = prevalence(records)
    assert report.per_domain["drift"].share == 1.0
    assert report.coverage == 1.0


def test_prevalence_counts_unclassified_in_coverage():
    records = [
        IncidentRecord(id="a", description="", classified_domain="misuse"),
        IncidentRecord(id="b", description="", classified_domain=UNCLASSIFIED),
        IncidentRecord(id="c", description="", classified_domain=None),
        IncidentRecord(id="d", description="", classified_domain="misuse"),
    ]
    report = prevalence(records)
    assert report.unclassified.count == 2
    assert report.coverage == 0.5


def test_prevalence_permutation_invariant():
    records = load_label_fixture()
    assert prevalence(records) == prevalence(list(reversed(records)))


def test_prevalence_renderings():
    report = prevalence(load_label_fixture())
    doc = json.loads(incidents.prevalence_to_json(report))
    assert doc["total"] == 133
    assert doc["per_domain"]["misuse"]["count"] == 81
    md = incidents.prevalence_to_markdown(report)
    assert "| misuse | 81 | 0.6090 |" in md
    assert "Total: 133" in md
