"""Threat taxonomy registry: nine domains, 53 sub-threats, loss mappings,
lifecycle tags, and the regulatory crosswalk.

The canonical registry ships as data (``data/registry.json``) with a JSON
schema (``data/registry.schema.json``). Loading is all-or-nothing: a document
either passes the schema plus every semantic invariant, or loading raises with
the full list of violations. A loaded registry is immutable and safe for
unrestricted concurrent reads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Union

import jsonschema

from .errors import Finding, SchemaError, UnknownId, ValidationError


class LossCategory(str, Enum):
    CONFIDENTIALITY = "Confidentiality"
    INTEGRITY = "Integrity"
    AVAILABILITY = "Availability"
    LEGAL = "Legal"
    REPUTATION = "Reputation"


class LifecyclePhase(str, Enum):
    DATA_COLLECTION = "DataCollection"
    MODEL_TRAINING = "ModelTraining"
    DEPLOYMENT = "Deployment"
    OPERATIONS = "Operations"


class TemporalPattern(str, Enum):
    DISCRETE_EVENT = "DiscreteEvent"
    CONTINUOUS_DEGRADATION = "ContinuousDegradation"


class ImpactProfile(str, Enum):
    BOUNDED = "Bounded"
    HEAVY_TAILED = "HeavyTailed"


class Framework(str, Enum):
    NIST_AI_RMF = "NIST_AI_RMF"
    ISO_42001 = "ISO_42001"
    EU_AI_ACT = "EU_AI_ACT"


# Reference syntax per framework: NIST "FUNCTION N.M", ISO dotted control
# numbers, EU "Art. N".
_REFERENCE_SYNTAX = {
    Framework.NIST_AI_RMF: re.compile(r"^(GOVERN|MAP|MEASURE|MANAGE) \d+\.\d+$"),
    Framework.ISO_42001: re.compile(r"^\d+(\.\d+)+$"),
    Framework.EU_AI_ACT: re.compile(r"^Art\. \d+$"),
}

# The canonical registry shape: domain display names in order, with the
# expected sub-threat count for each. The validator pins loaded documents to
# this shape; a future taxonomy release updates this table with the data.
CANONICAL_DOMAINS = (
    ("Misuse", 7),
    ("Poisoning", 8),
    ("Privacy", 5),
    ("Adversarial", 8),
    ("Biases", 5),
    ("Unreliable Outputs", 5),
    ("Drift", 5),
    ("Supply Chain", 5),
    ("IP Threat", 5),
)
EXPECTED_DOMAIN_COUNT = 9
EXPECTED_SUB_THREAT_COUNT = 53


@dataclass(frozen=True)
class RegulatoryAnchor:
    framework: Framework
    reference: str
    note: str = ""


@dataclass(frozen=True)
class SubThreat:
    id: str
    name: str
    domain_id: str
    temporal_pattern: TemporalPattern
    impact_profile: ImpactProfile
    lifecycle_phases: frozenset[LifecyclePhase]
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class ThreatDomain:
    id: str
    name: str
    description: str
    loss_categories: frozenset[LossCategory]
    prevalence_note: str
    sub_threats: tuple[SubThreat, ...]


@dataclass(frozen=True)
class TaxonomyRegistry:
    version: str
    domains: tuple[ThreatDomain, ...]
    crosswalk: Mapping[str, tuple[RegulatoryAnchor, ...]]
    changelog: tuple[str, ...] = ()
    _domain_index: dict = field(default=None, compare=False, repr=False)
    _sub_threat_index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_domain_index", {d.id: d for d in self.domains}
        )
        object.__setattr__(
            self,
            "_sub_threat_index",
            {s.id: s for d in self.domains for s in d.sub_threats},
        )

    # -- lookups ------------------------------------------------------------

    def domain(self, domain_id: str) -> ThreatDomain:
        try:
            return self._domain_index[domain_id]
        except KeyError:
            raise UnknownId(f"unknown domain id: {domain_id!r}") from None

    def sub_threat(self, sub_threat_id: str) -> SubThreat:
        try:
            return self._sub_threat_index[sub_threat_id]
        except KeyError:
            raise UnknownId(f"unknown sub-threat id: {sub_threat_id!r}") from None

    def domain_of(self, sub_threat_id: str) -> ThreatDomain:
        return self.domain(self.sub_threat(sub_threat_id).domain_id)

    def loss_categories_for(self, domain_id: str) -> frozenset[LossCategory]:
        return self.domain(domain_id).loss_categories

    def anchors_for(self, domain_id: str) -> tuple[RegulatoryAnchor, ...]:
        self.domain(domain_id)  # raises UnknownId for bad ids
        return self.crosswalk.get(domain_id, ())

    def query(
        self,
        *,
        lifecycle: LifecyclePhase | None = None,
        loss_category: LossCategory | None = None,
        temporal_pattern: TemporalPattern | None = None,
    ) -> list[SubThreat]:
        """All sub-threats matching every given filter, in registry order."""
        out = []
        for d in self.domains:
            if loss_category is not None and loss_category not in d.loss_categories:
                continue
            for s in d.sub_threats:
                if lifecycle is not None and lifecycle not in s.lifecycle_phases:
                    continue
                if temporal_pattern is not None and s.temporal_pattern != temporal_pattern:
                    continue
                out.append(s)
        return out

    @property
    def sub_threat_count(self) -> int:
        return len(self._sub_threat_index)

    def to_doc(self) -> dict:
        """Serialize back to the registry document shape."""
        return {
            "schema_version": "1",
            "version": self.version,
            "changelog": list(self.changelog),
            "domains": [
                {
                    "id": d.id,
                    "name": d.name,
                    "description": d.description,
                    "loss_categories": sorted(c.value for c in d.loss_categories),
                    "prevalence_note": d.prevalence_note,
                    "sub_threats": [
                        {
                            "id": s.id,
                            "name": s.name,
                            "temporal_pattern": s.temporal_pattern.value,
                            "impact_profile": s.impact_profile.value,
                            "lifecycle_phases": sorted(p.value for p in s.lifecycle_phases),
                            "keywords": list(s.keywords),
                        }
                        for s in d.sub_threats
                    ],
                }
                for d in self.domains
            ],
            "crosswalk": {
                did: [
                    {"framework": a.framework.value, "reference": a.reference, "note": a.note}
                    for a in anchors
                ]
                for did, anchors in self.crosswalk.items()
            },
        }


def validate_reference_syntax(framework: Framework, reference: str) -> bool:
    return bool(_REFERENCE_SYNTAX[framework].match(reference))


def _load_schema() -> dict:
    with resources.files("airisk.data").joinpath("registry.schema.json").open("rb") as fp:
        return json.load(fp)


def _collect_semantic_findings(doc: dict) -> list[Finding]:
    findings: list[Finding] = []

    domains = doc["domains"]
    if len(domains) != EXPECTED_DOMAIN_COUNT:
        findings.append(Finding(
            "domain_count",
            f"expected {EXPECTED_DOMAIN_COUNT} domains, found {len(domains)}",
        ))

    names = [d["name"] for d in domains]
    expected_names = [n for n, _ in CANONICAL_DOMAINS]
    if sorted(names) != sorted(expected_names):
        missing = set(expected_names) - set(names)
        extra = set(names) - set(expected_names)
        findings.append(Finding(
            "domain_names",
            f"domain names do not match the canonical nine "
            f"(missing: {sorted(missing)}, unexpected: {sorted(extra)})",
        ))
    else:
        expected_counts = dict(CANONICAL_DOMAINS)
        for d in domains:
            want = expected_counts[d["name"]]
            got = len(d["sub_threats"])
            if got != want:
                findings.append(Finding(
                    "sub_threat_count",
                    f"domain {d['name']!r} has {got} sub-threats, expected {want}",
                ))

    total = sum(len(d["sub_threats"]) for d in domains)
    if total != EXPECTED_SUB_THREAT_COUNT:
        findings.append(Finding(
            "total_sub_threats",
            f"expected {EXPECTED_SUB_THREAT_COUNT} sub-threats in total, found {total}",
        ))

    seen_domain_ids: set[str] = set()
    seen_sub_ids: dict[str, str] = {}
    for d in domains:
        if d["id"] in seen_domain_ids:
            findings.append(Finding("duplicate_id", f"duplicate domain id {d['id']!r}"))
        seen_domain_ids.add(d["id"])
        if not d["loss_categories"]:
            findings.append(Finding(
                "empty_loss_set", f"domain {d['id']!r} has an empty loss-category set"
            ))
        if not d["sub_threats"]:
            findings.append(Finding(
                "empty_domain", f"domain {d['id']!r} has no sub-threats"
            ))
        for s in d["sub_threats"]:
            if s["id"] in seen_sub_ids:
                findings.append(Finding(
                    "duplicate_id",
                    f"sub-threat id {s['id']!r} appears in both "
                    f"{seen_sub_ids[s['id']]!r} and {d['id']!r}",
                ))
            else:
                seen_sub_ids[s["id"]] = d["id"]
            if s["id"] in seen_domain_ids:
                findings.append(Finding(
                    "duplicate_id",
                    f"sub-threat id {s['id']!r} collides with a domain id",
                ))

    for did, anchors in doc["crosswalk"].items():
        if did not in seen_domain_ids:
            findings.append(Finding(
                "unknown_crosswalk_key", f"crosswalk key {did!r} is not a domain id"
            ))
        for a in anchors:
            fw = Framework(a["framework"])
            if not validate_reference_syntax(fw, a["reference"]):
                findings.append(Finding(
                    "anchor_syntax",
                    f"reference {a['reference']!r} is not valid {fw.value} syntax",
                ))

    return findings


def _build_registry(doc: dict) -> TaxonomyRegistry:
    domains = tuple(
        ThreatDomain(
            id=d["id"],
            name=d["name"],
            description=d["description"],
            loss_categories=frozenset(LossCategory(c) for c in d["loss_categories"]),
            prevalence_note=d["prevalence_note"],
            sub_threats=tuple(
                SubThreat(
                    id=s["id"],
                    name=s["name"],
                    domain_id=d["id"],
                    temporal_pattern=TemporalPattern(s["temporal_pattern"]),
                    impact_profile=ImpactProfile(s["impact_profile"]),
                    lifecycle_phases=frozenset(
                        LifecyclePhase(p) for p in s["lifecycle_phases"]
                    ),
                    keywords=tuple(s["keywords"]),
                )
                for s in d["sub_threats"]
            ),
        )
        for d in doc["domains"]
    )
    crosswalk = {
        did: tuple(
            RegulatoryAnchor(
                framework=Framework(a["framework"]),
                reference=a["reference"],
                note=a.get("note", ""),
            )
            for a in anchors
        )
        for did, anchors in doc["crosswalk"].items()
    }
    return TaxonomyRegistry(
        version=doc["version"],
        domains=domains,
        crosswalk=crosswalk,
        changelog=tuple(doc.get("changelog", ())),
    )


RegistrySource = Union[str, bytes, Path, BinaryIO]


def load_registry(source: RegistrySource) -> TaxonomyRegistry:
    """Load and fully validate a registry document.

    ``source`` may be a path, raw bytes/str, or a readable (binary) stream.
    Raises SchemaError for malformed documents and ValidationError carrying
    every violated semantic invariant. Loading the same bytes twice yields
    structurally equal registries.
    """
    if isinstance(source, Path):
        raw = source.read_bytes()
    elif isinstance(source, (bytes, str)):
        raw = source
    else:
        raw = source.read()

    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"registry document is not valid JSON: {exc}") from exc

    validator = jsonschema.Draft202012Validator(_load_schema())
    schema_errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if schema_errors:
        msgs = "; ".join(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in schema_errors[:10]
        )
        raise SchemaError(f"registry document violates schema: {msgs}")

    findings = _collect_semantic_findings(doc)
    if findings:
        raise ValidationError(findings)

    return _build_registry(doc)


def bundled_registry_path() -> Path:
    return Path(str(resources.files("airisk.data").joinpath("registry.json")))


def load_bundled_registry() -> TaxonomyRegistry:
    """Load the registry shipped with the package."""
    with resources.files("airisk.data").joinpath("registry.json").open("rb") as fp:
        return load_registry(fp)


def query_ids(sub_threats: Iterable[SubThreat]) -> list[str]:
    return [s.id for s in sub_threats]
