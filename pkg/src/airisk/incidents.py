"""Incident ingestion, keyword classification into threat domains, and
prevalence reporting.

Classification is deliberately simple and auditable: case-insensitive
whole-phrase matching against each domain's sub-threat names (weight 2) and
auxiliary keywords (weight 1). The highest-scoring domain wins, ties break by
registry order, and a zero score lands in the Unclassified bucket with the
matched phrases recorded on the row.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

from .errors import SchemaError
from .taxonomy import TaxonomyRegistry

UNCLASSIFIED = "unclassified"
# Fixture label for incidents that were classified but carry no published
# domain attribution; counts as classified in coverage.
OTHER_UNATTRIBUTED = "other_unattributed"

NAME_WEIGHT = 2
KEYWORD_WEIGHT = 1

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class IncidentRecord:
    id: str
    description: str
    date: str = ""
    title: str = ""
    source_url: Optional[str] = None
    classified_domain: Optional[str] = None  # domain id, UNCLASSIFIED, or None
    matched_keywords: tuple[str, ...] = ()


@dataclass(frozen=True)
class DomainShare:
    count: int
    share: float


@dataclass(frozen=True)
class PrevalenceReport:
    total: int
    per_domain: Mapping[str, DomainShare]
    unclassified: DomainShare
    coverage: float
    empty_input: bool = False


# --- ingestion -----------------------------------------------------------------

IncidentSource = Union[str, bytes, Path, TextIO]


def _as_text(source: IncidentSource) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def ingest(source: IncidentSource) -> list[IncidentRecord]:
    """Read incident rows from CSV (id,date,title,description,source_url) or
    a JSON array of objects with the same fields.

    Every row needs at least an id and a description; violations raise
    SchemaError naming the row.
    """
    text = _as_text(source)
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        return _ingest_json(stripped)
    return _ingest_csv(text)


def _record_from_fields(fields: Mapping, row_no: int) -> IncidentRecord:
    rec_id = (fields.get("id") or "").strip()
    description = (fields.get("description") or "").strip()
    if not rec_id:
        raise SchemaError(f"row {row_no}: missing id")
    if not description:
        raise SchemaError(f"row {row_no}: missing description")
    return IncidentRecord(
        id=rec_id,
        description=description,
        date=(fields.get("date") or "").strip(),
        title=(fields.get("title") or "").strip(),
        source_url=(fields.get("source_url") or None),
    )


def _ingest_csv(text: str) -> list[IncidentRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError("empty CSV input: a header row is required")
    missing = {"id", "description"} - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"CSV header lacks required column(s): {sorted(missing)}")
    records = []
    for row_no, row in enumerate(reader, start=2):  # header is row 1
        records.append(_record_from_fields(row, row_no))
    return records


def _ingest_json(text: str) -> list[IncidentRecord]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"incident input is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError("JSON incident input must be an array of objects")
    records = []
    for i, item in enumerate(doc, start=1):
        if not isinstance(item, dict):
            raise SchemaError(f"row {i}: expected an object, got {type(item).__name__}")
        records.append(_record_from_fields(item, i))
    return records


# --- classification --------------------------------------------------------------

def _normalize(text: str) -> str:
    return _NON_ALNUM.sub(" ", text.lower()).strip()


def _phrase_in(phrase_norm: str, text_norm: str) -> bool:
    return f" {phrase_norm} " in f" {text_norm} "


def classify(record: IncidentRecord, registry: TaxonomyRegistry) -> IncidentRecord:
    """Assign the record to exactly one domain (or Unclassified).

    Pure function of (description, registry); classifying an already
    classified record recomputes the same result.
    """
    text_norm = _normalize(record.description)
    best_domain = None
    best_score = 0
    best_matches: tuple[str, ...] = ()
    for domain in registry.domains:
        score = 0
        matches: list[str] = []
        for sub in domain.sub_threats:
            name_norm = _normalize(sub.name)
            if name_norm and _phrase_in(name_norm, text_norm):
                score += NAME_WEIGHT
                matches.append(name_norm)
            for kw in sub.keywords:
                kw_norm = _normalize(kw)
                if kw_norm and _phrase_in(kw_norm, text_norm):
                    score += KEYWORD_WEIGHT
                    matches.append(kw_norm)
        if score > best_score:  # ties keep the earlier domain (registry order)
            best_domain = domain.id
            best_score = score
            best_matches = tuple(matches)
    if best_domain is None:
        return replace(record, classified_domain=UNCLASSIFIED, matched_keywords=())
    return replace(record, classified_domain=best_domain, matched_keywords=best_matches)


def classify_all(records: Iterable[IncidentRecord], registry: TaxonomyRegistry) -> list[IncidentRecord]:
    return [classify(r, registry) for r in records]


# --- prevalence -------------------------------------------------------------------

def prevalence(records: Sequence[IncidentRecord]) -> PrevalenceReport:
    """Counts and shares per domain label. Records that were never classified
    (classified_domain is None) fall into the unclassified bucket alongside
    explicit Unclassified results; that is reported, not raised."""
    total = len(records)
    if total == 0:
        return PrevalenceReport(
            total=0,
            per_domain={},
            unclassified=DomainShare(0, 0.0),
            coverage=1.0,
            empty_input=True,
        )
    counts: dict[str, int] = {}
    unclassified = 0
    for r in records:
        label = r.classified_domain
        if label is None or label == UNCLASSIFIED:
            unclassified += 1
        else:
            counts[label] = counts.get(label, 0) + 1
    per_domain = {
        label: DomainShare(c, c / total) for label, c in sorted(counts.items())
    }
    return PrevalenceReport(
        total=total,
        per_domain=per_domain,
        unclassified=DomainShare(unclassified, unclassified / total),
        coverage=(total - unclassified) / total,
    )


# --- fixtures and rendering --------------------------------------------------------

def load_label_fixture() -> list[IncidentRecord]:
    """The bundled 133-incident label distribution, expanded to one
    pre-classified record per incident (no incident text is shipped)."""
    with resources.files("airisk.data").joinpath("incident_labels_2025.json").open("rb") as fp:
        doc = json.load(fp)
    records = []
    n = 0
    for label, count in doc["label_counts"].items():
        for _ in range(count):
            n += 1
            records.append(IncidentRecord(
                id=f"aiid-2025-{n:03d}",
                description="",
                classified_domain=label,
            ))
    return records


def bundled_synthetic_corpus_path() -> Path:
    return Path(str(resources.files("airisk.data").joinpath("synthetic_incidents.csv")))


def prevalence_to_json(report: PrevalenceReport) -> bytes:
    doc = {
        "total": report.total,
        "coverage": report.coverage,
        "empty_input": report.empty_input,
        "unclassified": {"count": report.unclassified.count, "share": report.unclassified.share},
        "per_domain": {
            label: {"count": s.count, "share": s.share}
            for label, s in report.per_domain.items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")


def prevalence_to_markdown(report: PrevalenceReport) -> str:
    lines = [
        "| domain | count | share |",
        "| --- | ---: | ---: |",
    ]
    for label, s in sorted(report.per_domain.items(), key=lambda kv: (-kv[1].count, kv[0])):
        lines.append(f"| {label} | {s.count} | {s.share:.4f} |")
    lines.append(f"| (unclassified) | {report.unclassified.count} | {report.unclassified.share:.4f} |")
    lines.append("")
    lines.append(f"Total: {report.total}; coverage: {report.coverage:.4f}")
    return "\n".join(lines) + "\n"
