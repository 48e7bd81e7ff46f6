"""Trust-policy selection and deterministic replay of span edits.

Reconstruction is a pure function of (base text, event set, policy,
conflict mode): select events under the policy, detect overlaps, resolve
conflicts, order by (span_start, event_id), and apply as base-anchored
replacements. The output carries a full application trace so every input
event's fate is auditable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .model import (
    BaseDocument,
    DuplicateEventIdError,
    SpanEditEvent,
    events_overlap,
    validate_event_set,
)
from .offsets import OffsetMap, Segment

OUTCOME_APPLIED = "applied"
OUTCOME_SKIPPED_POLICY = "skipped_policy"
OUTCOME_EXCLUDED_REJECTED = "excluded_rejected"
OUTCOME_CONFLICT_LOST = "conflict_lost"
OUTCOME_CONFLICT_ERROR = "conflict_error"

CONFLICT_MODES = ("resolve", "error", "skip_group")

_SOURCE_RANK = {"human": 0, "model": 1, "rule": 2}
_REVIEW_RANK = {"approved": 0, None: 1, "unreviewed": 1, "rejected": 2}


class ConflictError(ValueError):
    """Overlapping selected events under conflict mode "error"."""

    def __init__(self, groups: list[tuple[SpanEditEvent, ...]]):
        self.groups = [tuple(e.event_id for e in g) for g in groups]
        listing = "; ".join("{" + ", ".join(g) + "}" for g in self.groups)
        super().__init__(f"overlapping events require adjudication: {listing}")


class ApplyIntegrityError(ValueError):
    """Base text no longer matches an event's orig_text at apply time."""


@dataclass(frozen=True)
class TrustPolicy:
    """Declarative predicate over event metadata.

    With all optional fields absent and require_approved false this is the
    "all corrections" policy (rejected events are still vetoed unless
    exclude_rejected is turned off: rejection is an explicit human veto).
    An event without a confidence value fails any min_confidence policy.
    """

    name: str
    min_confidence: float | None = None
    require_approved: bool = False
    allowed_sources: frozenset[str] | None = None
    exclude_rejected: bool = True

    def __post_init__(self):
        if self.allowed_sources is not None and not isinstance(self.allowed_sources, frozenset):
            object.__setattr__(self, "allowed_sources", frozenset(self.allowed_sources))

    def is_rejected_veto(self, event: SpanEditEvent) -> bool:
        return self.exclude_rejected and event.review_status == "rejected"

    def selects(self, event: SpanEditEvent) -> bool:
        if self.is_rejected_veto(event):
            return False
        if self.min_confidence is not None:
            if event.confidence is None or event.confidence < self.min_confidence:
                return False
        if self.require_approved and event.review_status != "approved":
            return False
        if self.allowed_sources is not None and event.source not in self.allowed_sources:
            return False
        return True

    def descriptor(self) -> dict:
        return {
            "name": self.name,
            "min_confidence": self.min_confidence,
            "require_approved": self.require_approved,
            "allowed_sources": sorted(self.allowed_sources) if self.allowed_sources is not None else None,
            "exclude_rejected": self.exclude_rejected,
        }


#: Named presets mirroring the standard strictness ladder.
POLICY_PRESETS: dict[str, TrustPolicy] = {
    "raw": TrustPolicy(name="raw", allowed_sources=frozenset()),
    "all": TrustPolicy(name="all"),
    "conf50": TrustPolicy(name="conf50", min_confidence=0.50),
    "conf70": TrustPolicy(name="conf70", min_confidence=0.70),
    "conf85": TrustPolicy(name="conf85", min_confidence=0.85),
    "approved": TrustPolicy(name="approved", require_approved=True),
}


def parse_policy(spec: str) -> TrustPolicy:
    """Accepts a preset name, a conf>=X shorthand, or an inline JSON object."""
    spec = spec.strip()
    if spec in POLICY_PRESETS:
        return POLICY_PRESETS[spec]
    if spec.startswith("conf>="):
        threshold = float(spec[len("conf>=") :])
        return TrustPolicy(name=spec, min_confidence=threshold)
    if spec.startswith("{"):
        data = json.loads(spec)
        return TrustPolicy(
            name=data.get("name", "inline"),
            min_confidence=data.get("min_confidence"),
            require_approved=bool(data.get("require_approved", False)),
            allowed_sources=(
                frozenset(data["allowed_sources"]) if data.get("allowed_sources") is not None else None
            ),
            exclude_rejected=bool(data.get("exclude_rejected", True)),
        )
    raise ValueError(
        f"unknown policy {spec!r}: expected one of {sorted(POLICY_PRESETS)}, "
        "'conf>=<threshold>', or an inline JSON object"
    )


@dataclass(frozen=True)
class TraceEntry:
    event_id: str
    outcome: str
    lost_to: str | None = None

    def to_json(self) -> dict:
        entry: dict = {"event_id": self.event_id, "outcome": self.outcome}
        if self.lost_to is not None:
            entry["lost_to"] = self.lost_to
        return entry


@dataclass(frozen=True)
class ApplicationTrace:
    policy: dict
    base_digest: str
    entries: tuple[TraceEntry, ...]

    def outcomes(self, outcome: str) -> list[str]:
        return [e.event_id for e in self.entries if e.outcome == outcome]

    @property
    def applied_ids(self) -> list[str]:
        return self.outcomes(OUTCOME_APPLIED)

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "base_digest": self.base_digest,
            "entries": [e.to_json() for e in self.entries],
        }


@dataclass(frozen=True)
class Variant:
    variant_id: str
    doc_id: str
    text: str
    trace: ApplicationTrace
    offset_map: OffsetMap


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _variant_id(doc_id: str, base_digest: str, policy: dict, applied_ids: list[str]) -> str:
    payload = json.dumps(
        {"doc_id": doc_id, "base": base_digest, "policy": policy, "applied": applied_ids},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def select_events(
    events: list[SpanEditEvent], policy: TrustPolicy
) -> tuple[list[SpanEditEvent], list[TraceEntry]]:
    """Pure policy filter: selected events plus trace entries for the rest."""
    selected: list[SpanEditEvent] = []
    skipped: list[TraceEntry] = []
    for event in events:
        if policy.is_rejected_veto(event):
            skipped.append(TraceEntry(event.event_id, OUTCOME_EXCLUDED_REJECTED))
        elif policy.selects(event):
            selected.append(event)
        else:
            skipped.append(TraceEntry(event.event_id, OUTCOME_SKIPPED_POLICY))
    return selected, skipped


def order_events(selected: list[SpanEditEvent]) -> list[SpanEditEvent]:
    """Total order: span_start ascending, ties by event_id (lexicographic on
    the raw string; no numeric awareness). Permutation-invariant.

    A zero-width insert sorts before a replacement starting at the same
    position: they legally coexist (abutting, not overlapping) and the
    inserted text belongs before the replacement's output.
    """
    seen: set[str] = set()
    for e in selected:
        if e.event_id in seen:
            raise DuplicateEventIdError(f"duplicate event_id {e.event_id!r}")
        seen.add(e.event_id)
    return sorted(selected, key=lambda e: (e.span_start, not e.is_zero_width, e.event_id))


def conflict_priority_key(event: SpanEditEvent):
    """Lower sorts first: source rank, review rank, confidence descending
    (absent = lowest), then event_id ascending as the deterministic final
    tie-break."""
    return (
        _SOURCE_RANK.get(event.source, len(_SOURCE_RANK)),
        _REVIEW_RANK.get(event.review_status, 1),
        -(event.confidence if event.confidence is not None else -1.0),
        event.event_id,
    )


def resolve_conflicts(
    group: list[SpanEditEvent] | tuple[SpanEditEvent, ...], mode: str = "resolve"
) -> tuple[SpanEditEvent | None, list[TraceEntry]]:
    """Resolve one maximal overlap group.

    resolve: exactly one winner by the priority order, losers conflict_lost.
    error: raise, listing the group for adjudication.
    skip_group: every member conflict_error, nothing applied.
    """
    members = list(group)
    if len(members) < 2:
        raise ValueError("conflict group must have at least two members")
    if mode == "error":
        raise ConflictError([tuple(members)])
    if mode == "skip_group":
        return None, [TraceEntry(e.event_id, OUTCOME_CONFLICT_ERROR) for e in members]
    if mode != "resolve":
        raise ValueError(f"unknown conflict mode {mode!r}")
    ranked = sorted(members, key=conflict_priority_key)
    winner = ranked[0]
    entries = [
        TraceEntry(e.event_id, OUTCOME_CONFLICT_LOST, lost_to=winner.event_id) for e in ranked[1:]
    ]
    return winner, entries


def apply_events(doc: BaseDocument, ordered: list[SpanEditEvent]) -> tuple[str, OffsetMap]:
    """Apply pairwise non-overlapping, ordered events to the base text.

    Re-checks orig_text integrity at apply time so a base text changed since
    validation can never be silently patched.
    """
    text = doc.text
    pieces: list[str] = []
    segments: list[Segment] = []
    cursor = 0
    var_cursor = 0
    for event in ordered:
        s, e = event.span_start, event.span_end
        if s < cursor:
            raise ValueError(f"event {event.event_id} overlaps a previously applied span")
        expected = text[s:e]
        if event.orig_text != expected:
            raise ApplyIntegrityError(
                f"event {event.event_id}: orig_text {event.orig_text!r} does not match "
                f"base substring {expected!r} at [{s},{e})"
            )
        if s > cursor:
            pieces.append(text[cursor:s])
            segments.append(Segment(cursor, s, var_cursor, var_cursor + (s - cursor), edited=False))
            var_cursor += s - cursor
        pieces.append(event.new_text)
        segments.append(
            Segment(s, e, var_cursor, var_cursor + len(event.new_text), edited=True, event_id=event.event_id)
        )
        var_cursor += len(event.new_text)
        cursor = e
    if cursor < len(text):
        pieces.append(text[cursor:])
        segments.append(Segment(cursor, len(text), var_cursor, var_cursor + len(text) - cursor, edited=False))
        var_cursor += len(text) - cursor
    variant_text = "".join(pieces)
    offset_map = OffsetMap(segments=tuple(segments), base_len=len(text), var_len=var_cursor)
    return variant_text, offset_map


def reconstruct(
    doc: BaseDocument,
    events: list[SpanEditEvent],
    policy: TrustPolicy,
    conflict_mode: str = "error",
) -> Variant:
    """Full pipeline: select, detect overlaps, resolve, order, apply.

    The trace covers every input event exactly once. Output (text, trace,
    variant_id) is invariant under permutation of the input event list.
    """
    if conflict_mode not in CONFLICT_MODES:
        raise ValueError(f"unknown conflict mode {conflict_mode!r}")

    seen: set[str] = set()
    for e in events:
        if e.event_id in seen:
            raise DuplicateEventIdError(f"duplicate event_id {e.event_id!r}")
        seen.add(e.event_id)

    selected, skipped_entries = select_events(events, policy)
    _, groups = validate_event_set(selected, doc)

    conflict_entries: list[TraceEntry] = []
    accepted = selected
    if groups:
        if conflict_mode == "error":
            raise ConflictError(groups)
        if conflict_mode == "skip_group":
            conflicted = {e.event_id for g in groups for e in g}
            conflict_entries = [
                TraceEntry(eid, OUTCOME_CONFLICT_ERROR) for eid in sorted(conflicted)
            ]
            accepted = [e for e in selected if e.event_id not in conflicted]
        else:
            # Greedy acceptance in priority order: within each maximal
            # clique this picks exactly the group winner.
            accepted = []
            losses: dict[str, str] = {}
            for event in sorted(selected, key=conflict_priority_key):
                blocker = next((a for a in accepted if events_overlap(event, a)), None)
                if blocker is None:
                    accepted.append(event)
                else:
                    losses[event.event_id] = blocker.event_id
            conflict_entries = [
                TraceEntry(eid, OUTCOME_CONFLICT_LOST, lost_to=winner)
                for eid, winner in sorted(losses.items())
            ]

    ordered = order_events(accepted)
    variant_text, offset_map = apply_events(doc, ordered)

    applied_entries = [TraceEntry(e.event_id, OUTCOME_APPLIED) for e in ordered]
    # Canonical entry order (by event_id) keeps the trace byte-identical
    # under permutation of the input event list.
    all_entries = (*skipped_entries, *conflict_entries, *applied_entries)
    entries = tuple(sorted(all_entries, key=lambda t: t.event_id))

    descriptor = policy.descriptor()
    base_digest = text_digest(doc.text)
    trace = ApplicationTrace(policy=descriptor, base_digest=base_digest, entries=entries)
    variant_id = _variant_id(doc.doc_id, base_digest, descriptor, [e.event_id for e in ordered])
    return Variant(
        variant_id=variant_id,
        doc_id=doc.doc_id,
        text=variant_text,
        trace=trace,
        offset_map=offset_map,
    )
