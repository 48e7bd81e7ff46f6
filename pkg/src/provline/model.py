"""Domain types for span-edit correction provenance and their record-level checks.

Every edit is anchored to a base revision of a document's text. Offsets are
Unicode-codepoint indices into exactly the stored base string, half-open
[span_start, span_end). Nothing here mutates anything: events and documents
are frozen values, and validation returns reports instead of raising (except
for caller bugs like mismatched doc ids).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

EDIT_TYPES = frozenset({"substitute", "insert", "delete", "split", "merge", "normalize"})
SOURCES = frozenset({"rule", "model", "human"})
REVIEW_STATUSES = frozenset({"unreviewed", "approved", "rejected"})

#: Table-of-record field order, used for stable serialization.
EVENT_FIELDS = (
    "schema_version",
    "event_id",
    "doc_id",
    "page_id",
    "base_revision",
    "span_start",
    "span_end",
    "orig_text",
    "new_text",
    "edit_type",
    "source",
    "confidence",
    "review_status",
    "reviewer_id",
    "layout_zone",
    "note",
)

REQUIRED_EVENT_FIELDS = (
    "schema_version",
    "event_id",
    "doc_id",
    "page_id",
    "base_revision",
    "span_start",
    "span_end",
    "orig_text",
    "new_text",
    "edit_type",
    "source",
)


class DocumentMismatchError(ValueError):
    """Event was validated against the wrong document (caller bug, not bad data)."""


class DuplicateEventIdError(ValueError):
    """Two events in one set share an event_id."""


@dataclass(frozen=True)
class BaseDocument:
    """The anchor text every edit offset refers to.

    ``text`` is stored verbatim; no Unicode normalization is applied on load,
    because normalization would silently invalidate every recorded offset.
    """

    doc_id: str
    page_id: str | int
    text: str
    base_revision: int = 0

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if self.base_revision < 0:
            raise ValueError("base_revision must be >= 0")


@dataclass(frozen=True)
class SpanEditEvent:
    """One recorded correction, anchored to the base revision.

    ``extra`` carries unknown fields from serialized records so that minor
    schema versions round-trip losslessly; they are ignored semantically.
    """

    schema_version: str
    event_id: str
    doc_id: str
    page_id: str | int
    base_revision: int
    span_start: int
    span_end: int
    orig_text: str
    new_text: str
    edit_type: str
    source: str
    confidence: float | None = None
    review_status: str | None = None
    reviewer_id: str | None = None
    layout_zone: str | None = None
    note: str | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.extra, MappingProxyType):
            object.__setattr__(self, "extra", MappingProxyType(dict(self.extra)))

    @property
    def is_zero_width(self) -> bool:
        return self.span_start == self.span_end

    def with_review(self, review_status: str | None, reviewer_id: str | None) -> "SpanEditEvent":
        """Copy of this event with an updated effective review status."""
        return SpanEditEvent(
            schema_version=self.schema_version,
            event_id=self.event_id,
            doc_id=self.doc_id,
            page_id=self.page_id,
            base_revision=self.base_revision,
            span_start=self.span_start,
            span_end=self.span_end,
            orig_text=self.orig_text,
            new_text=self.new_text,
            edit_type=self.edit_type,
            source=self.source,
            confidence=self.confidence,
            review_status=review_status,
            reviewer_id=reviewer_id,
            layout_zone=self.layout_zone,
            note=self.note,
            extra=dict(self.extra),
        )


@dataclass(frozen=True)
class Verdict:
    check: str
    passed: bool
    message: str


@dataclass(frozen=True)
class ValidationReport:
    event_id: str
    verdicts: tuple[Verdict, ...]

    @property
    def overall(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.passed]


def _parse_schema_version(version: str) -> tuple[int, ...] | None:
    parts = version.split(".")
    if not parts or not all(p.isdigit() for p in parts):
        return None
    return tuple(int(p) for p in parts)


def validate_event(event: SpanEditEvent, doc: BaseDocument) -> ValidationReport:
    """Check one event against its base document.

    Pure: returns a report with one verdict per record-level invariant,
    never mutates or raises on bad data. Raises DocumentMismatchError only
    when the event does not reference ``doc`` at all.
    """
    if event.doc_id != doc.doc_id:
        raise DocumentMismatchError(
            f"event {event.event_id} references doc {event.doc_id!r}, got {doc.doc_id!r}"
        )

    verdicts: list[Verdict] = []

    def check(name: str, passed: bool, message: str) -> None:
        verdicts.append(Verdict(name, passed, message if not passed else "ok"))

    parsed = _parse_schema_version(event.schema_version)
    check(
        "schema_version",
        parsed is not None and parsed[0] == 1,
        f"schema_version {event.schema_version!r} is not a supported 1.x version",
    )

    check(
        "base_revision",
        event.base_revision == doc.base_revision,
        f"event anchored to revision {event.base_revision}, document is revision {doc.base_revision}",
    )

    n = len(doc.text)
    bounds_ok = 0 <= event.span_start <= event.span_end <= n
    check(
        "offset_bounds",
        bounds_ok,
        f"span [{event.span_start},{event.span_end}) out of bounds for text of length {n}",
    )

    # Zero-width spans are representable only as inserts; every other edit
    # type keeps the strict half-open requirement.
    if event.span_start == event.span_end:
        check(
            "half_open_span",
            event.edit_type == "insert",
            f"zero-width span only permitted for insert, not {event.edit_type!r}",
        )
    else:
        check("half_open_span", True, "")

    if bounds_ok:
        expected = "" if event.edit_type == "insert" and event.is_zero_width else doc.text[event.span_start : event.span_end]
        check(
            "integrity",
            event.orig_text == expected,
            f"orig_text {event.orig_text!r} does not match base substring {expected!r}",
        )
    else:
        check("integrity", False, "integrity unverifiable: span out of bounds")

    enum_ok = event.edit_type in EDIT_TYPES and event.source in SOURCES and (
        event.review_status is None or event.review_status in REVIEW_STATUSES
    )
    check(
        "enums",
        enum_ok,
        f"invalid enum value(s): edit_type={event.edit_type!r} source={event.source!r} "
        f"review_status={event.review_status!r}",
    )

    if event.edit_type == "delete":
        text_rule_ok = event.new_text == ""
        text_rule_msg = "delete requires empty new_text"
    elif event.edit_type == "insert":
        text_rule_ok = event.new_text != "" and event.orig_text == ""
        text_rule_msg = "insert requires non-empty new_text and empty orig_text"
    else:
        text_rule_ok, text_rule_msg = True, ""
    check("edit_type_text", text_rule_ok, text_rule_msg)

    check(
        "confidence_range",
        event.confidence is None or 0.0 <= event.confidence <= 1.0,
        f"confidence {event.confidence!r} outside [0,1]",
    )

    return ValidationReport(event_id=event.event_id, verdicts=tuple(verdicts))


def events_overlap(a: SpanEditEvent, b: SpanEditEvent) -> bool:
    """Half-open overlap; adjacency at a shared boundary is not overlap.

    A zero-width insert at p overlaps an event whose open interval strictly
    contains p. Two inserts at the same position coexist (applied in
    event_id order) and do not overlap.
    """
    if a.is_zero_width and b.is_zero_width:
        return False
    if a.is_zero_width:
        return b.span_start < a.span_start < b.span_end
    if b.is_zero_width:
        return a.span_start < b.span_start < a.span_end
    return a.span_start < b.span_end and b.span_start < a.span_end


def _maximal_cliques(adj: dict[str, set[str]]) -> list[frozenset[str]]:
    """Bron-Kerbosch with pivoting. Overlap groups are small in practice."""
    cliques: list[frozenset[str]] = []

    def expand(r: set[str], p: set[str], x: set[str]) -> None:
        if not p and not x:
            if len(r) >= 2:
                cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda v: len(adj[v] & p))
        for v in list(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    nodes = {v for v, ns in adj.items() if ns}
    if nodes:
        expand(set(), set(nodes), set())
    return cliques


def validate_event_set(
    events: list[SpanEditEvent], doc: BaseDocument
) -> tuple[list[ValidationReport], list[tuple[SpanEditEvent, ...]]]:
    """Validate each event and detect overlap groups on the base intervals.

    Returns per-event reports plus the maximal groups of events whose base
    intervals pairwise intersect, each group sorted by (span_start, event_id).
    Duplicate event_ids are a hard error: replay tie-breaking requires
    uniqueness.
    """
    seen: set[str] = set()
    for e in events:
        if e.event_id in seen:
            raise DuplicateEventIdError(f"duplicate event_id {e.event_id!r}")
        seen.add(e.event_id)

    reports = [validate_event(e, doc) for e in events]

    by_id = {e.event_id: e for e in events}
    adj: dict[str, set[str]] = {e.event_id: set() for e in events}
    for i, a in enumerate(events):
        for b in events[i + 1 :]:
            if events_overlap(a, b):
                adj[a.event_id].add(b.event_id)
                adj[b.event_id].add(a.event_id)

    groups = [
        tuple(sorted((by_id[i] for i in clique), key=lambda e: (e.span_start, e.event_id)))
        for clique in _maximal_cliques(adj)
    ]
    groups.sort(key=lambda g: (g[0].span_start, g[0].event_id))
    return reports, groups
