import copy
import json

import pytest

from airisk.errors import SchemaError, UnknownId, ValidationError
from airisk.taxonomy import (
    Framework,
    LifecyclePhase,
    LossCategory,
    TemporalPattern,
    bundled_registry_path,
    load_bundled_registry,
    load_registry,
    validate_reference_syntax,
)

EXPECTED_NAMES = [
    "Misuse", "Poisoning", "Privacy", "Adversarial", "Biases",
    "Unreliable Outputs", "Drift", "Supply Chain", "IP Threat",
]
EXPECTED_COUNTS = [7, 8, 5, 8, 5, 5, 5, 5, 5]


def test_bundled_registry_shape(registry):
    assert len(registry.domains) == 9
    assert registry.sub_threat_count == 53
    assert [d.name for d in registry.domains] == EXPECTED_NAMES
    assert [len(d.sub_threats) for d in registry.domains] == EXPECTED_COUNTS


def test_sub_threat_ids_globally_unique(registry):
    ids = [s.id for d in registry.domains for s in d.sub_threats]
    assert len(ids) == len(set(ids)) == 53


def test_load_is_idempotent():
    raw = bundled_registry_path().read_bytes()
    assert load_registry(raw) == load_registry(raw)


def test_domain_of(registry):
    assert registry.domain_of("prompt_injection").name == "Misuse"
    assert registry.domain_of("concept_drift").name == "Drift"
    with pytest.raises(UnknownId):
        registry.domain_of("nonexistent_id")


def test_bidirectional_consistency(registry):
    for d in registry.domains:
        for s in d.sub_threats:
            parent = registry.domain_of(s.id)
            assert parent.id == d.id
            assert s in parent.sub_threats


def test_loss_categories_for(registry):
    privacy = registry.loss_categories_for("privacy")
    assert LossCategory.CONFIDENTIALITY in privacy
    assert LossCategory.LEGAL in privacy
    misuse = registry.loss_categories_for("misuse")
    assert misuse == {LossCategory.LEGAL, LossCategory.REPUTATION}
    for d in registry.domains:
        assert registry.loss_categories_for(d.id)
    with pytest.raises(UnknownId):
        registry.loss_categories_for("nope")


def test_anchors_for_published_pairings(registry):
    def refs(domain_id, framework):
        return [
            a.reference
            for a in registry.anchors_for(domain_id)
            if a.framework is framework
        ]

    assert refs("misuse", Framework.NIST_AI_RMF) == ["GOVERN 1.5", "MANAGE 2.3"]
    assert refs("privacy", Framework.NIST_AI_RMF) == ["MAP 1.2", "MEASURE 2.7"]
    assert refs("biases", Framework.NIST_AI_RMF) == ["MEASURE 2.11"]
    assert refs("biases", Framework.ISO_42001) == ["6.2.2"]
    assert refs("poisoning", Framework.ISO_42001) == ["6.3.1"]
    assert refs("drift", Framework.ISO_42001) == ["6.4.1"]
    # unmapped cells ship empty rather than invented
    assert registry.anchors_for("adversarial") == ()
    with pytest.raises(UnknownId):
        registry.anchors_for("nope")


def test_crosswalk_references_pass_syntax_validators(registry):
    for anchors in registry.crosswalk.values():
        for a in anchors:
            assert validate_reference_syntax(a.framework, a.reference), a


@pytest.mark.parametrize(
    "framework,reference,ok",
    [
        (Framework.NIST_AI_RMF, "GOVERN 1.5", True),
        (Framework.NIST_AI_RMF, "govern 1.5", False),
        (Framework.NIST_AI_RMF, "AUDIT 1.5", False),
        (Framework.ISO_42001, "6.2.2", True),
        (Framework.ISO_42001, "6", False),
        (Framework.EU_AI_ACT, "Art. 9", True),
        (Framework.EU_AI_ACT, "Article 9", False),
    ],
)
def test_reference_syntax(framework, reference, ok):
    assert validate_reference_syntax(framework, reference) is ok


def test_query_by_temporal_pattern(registry):
    continuous = registry.query(temporal_pattern=TemporalPattern.CONTINUOUS_DEGRADATION)
    assert "concept_drift" in [s.id for s in continuous]
    assert all(s.domain_id == "drift" for s in continuous)
    discrete = registry.query(temporal_pattern=TemporalPattern.DISCRETE_EVENT)
    assert "prompt_injection" in [s.id for s in discrete]
    assert len(continuous) + len(discrete) == 53


def test_query_by_loss_category_matches_data_enumeration(registry, registry_doc):
    # independent oracle: enumerate the shipped document directly
    expected = [
        s["id"]
        for d in registry_doc["domains"]
        if "Confidentiality" in d["loss_categories"]
        for s in d["sub_threats"]
    ]
    got = [s.id for s in registry.query(loss_category=LossCategory.CONFIDENTIALITY)]
    assert got == expected
    privacy_and_ip = {
        s.id for d in registry.domains if d.id in ("privacy", "ip_threat")
        for s in d.sub_threats
    }
    assert privacy_and_ip <= set(got)


def test_query_by_lifecycle(registry):
    training = registry.query(lifecycle=LifecyclePhase.MODEL_TRAINING)
    assert "model_backdooring" in [s.id for s in training]
    assert all(LifecyclePhase.MODEL_TRAINING in s.lifecycle_phases for s in training)


def test_query_combined_filters_empty_is_valid(registry):
    out = registry.query(
        lifecycle=LifecyclePhase.DATA_COLLECTION,
        temporal_pattern=TemporalPattern.CONTINUOUS_DEGRADATION,
    )
    assert out == []


def test_duplicate_sub_threat_rejected(registry_doc):
    doc = copy.deepcopy(registry_doc)
    # duplicate prompt_injection into a second domain
    doc["domains"][1]["sub_threats"][0]["id"] = "prompt_injection"
    with pytest.raises(ValidationError) as exc:
        load_registry(json.dumps(doc))
    assert any(
        f.code == "duplicate_id" and "prompt_injection" in f.message
        for f in exc.value.findings
    )


def test_wrong_domain_count_rejected(registry_doc):
    doc = copy.deepcopy(registry_doc)
    del doc["domains"][8]
    with pytest.raises(ValidationError) as exc:
        load_registry(json.dumps(doc))
    codes = {f.code for f in exc.value.findings}
    assert "domain_count" in codes


def test_empty_loss_set_rejected(registry_doc):
    doc = copy.deepcopy(registry_doc)
    doc["domains"][0]["loss_categories"] = []
    with pytest.raises(ValidationError) as exc:
        load_registry(json.dumps(doc))
    assert any(f.code == "empty_loss_set" for f in exc.value.findings)


def test_bad_anchor_syntax_rejected(registry_doc):
    doc = copy.deepcopy(registry_doc)
    doc["crosswalk"]["misuse"][0]["reference"] = "GOVERN ONE"
    with pytest.raises(ValidationError) as exc:
        load_registry(json.dumps(doc))
    assert any(f.code == "anchor_syntax" for f in exc.value.findings)


def test_malformed_json_is_schema_error():
    with pytest.raises(SchemaError):
        load_registry(b"{not json")


def test_schema_violation_is_schema_error(registry_doc):
    doc = copy.deepcopy(registry_doc)
    del doc["domains"][0]["sub_threats"][0]["temporal_pattern"]
    with pytest.raises(SchemaError):
        load_registry(json.dumps(doc))


def test_load_from_stream():
    with open(bundled_registry_path(), "rb") as fp:
        assert load_registry(fp) == load_bundled_registry()
