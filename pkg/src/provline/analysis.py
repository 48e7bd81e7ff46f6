"""Downstream metrics: mention statistics, cross-variant alignment, entity
volatility, event attribution, signal utility, entity-linking measures, and
the policy sweep.

Entity identity is exact codepoint equality of surface strings, case
sensitive, no normalization. All comparisons project mentions into base
coordinates through each variant's offset map; that projection is how
base-anchored events and variant-space mentions meet.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .model import SpanEditEvent
from .replay import OUTCOME_APPLIED, Variant

#: Lift when the unflagged volatility rate is zero; never reported as infinity.
UNDEFINED = "undefined"

DEFAULT_WINDOW = 50
CONTEXT_CHARS = 80

#: Built-in provenance signals over events (Table-4-style flags). An absent
#: confidence counts as low confidence (lowest possible score).
BUILTIN_SIGNALS: dict[str, Callable[[SpanEditEvent], bool]] = {
    "low_confidence": lambda e: e.confidence is None or e.confidence < 0.70,
    "unreviewed": lambda e: e.review_status != "approved",
    "split_merge": lambda e: e.edit_type in ("split", "merge"),
    "non_body_zone": lambda e: e.layout_zone is not None and e.layout_zone != "body",
}


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class EntityMention:
    """One extracted entity span, in its variant's codepoint coordinates."""

    doc_id: str
    variant_id: str
    start: int
    end: int
    surface: str
    label: str
    kb_id: str | None = None

    def to_json(self) -> dict:
        record = {
            "doc_id": self.doc_id,
            "variant_id": self.variant_id,
            "start": self.start,
            "end": self.end,
            "surface": self.surface,
            "label": self.label,
        }
        if self.kb_id is not None:
            record["kb_id"] = self.kb_id
        return record


@dataclass(frozen=True)
class Attribution:
    event_id: str
    method: str  # "overlap" | "window"
    distance: int


@dataclass(frozen=True)
class MatchedPair:
    mention_a: EntityMention
    mention_b: EntityMention
    base_a: tuple[int, int]
    base_b: tuple[int, int]


@dataclass(frozen=True)
class Alignment:
    matched: tuple[MatchedPair, ...]
    unmatched_a: tuple[tuple[EntityMention, tuple[int, int]], ...]
    unmatched_b: tuple[tuple[EntityMention, tuple[int, int]], ...]


@dataclass(frozen=True)
class VolatilityRecord:
    kind: str  # added | removed | surface_changed | boundary_changed
    mention_a: EntityMention | None
    mention_b: EntityMention | None
    base_anchor: tuple[int, int]
    attributed_events: tuple[Attribution, ...] = ()

    def with_attributions(self, attributions: Sequence[Attribution]) -> "VolatilityRecord":
        return VolatilityRecord(
            kind=self.kind,
            mention_a=self.mention_a,
            mention_b=self.mention_b,
            base_anchor=self.base_anchor,
            attributed_events=tuple(attributions),
        )

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "mention_a": self.mention_a.to_json() if self.mention_a else None,
            "mention_b": self.mention_b.to_json() if self.mention_b else None,
            "base_anchor": list(self.base_anchor),
            "attributed_events": [
                {"event_id": a.event_id, "method": a.method, "distance": a.distance}
                for a in self.attributed_events
            ],
        }


@dataclass(frozen=True)
class SignalUtilityRow:
    signal: str
    prevalence: float
    flagged_volatility_rate: float | str
    unflagged_volatility_rate: float | str
    lift: float | str

    def to_json(self) -> dict:
        return {
            "signal": self.signal,
            "prevalence": self.prevalence,
            "flagged_volatility_rate": self.flagged_volatility_rate,
            "unflagged_volatility_rate": self.unflagged_volatility_rate,
            "lift": self.lift,
        }


@dataclass(frozen=True)
class SweepRow:
    policy: str
    mentions: int
    unique: int
    jaccard_vs_raw: float
    volatile: int | None  # None for the raw row itself

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "mentions": self.mentions,
            "unique": self.unique,
            "jaccard_vs_raw": self.jaccard_vs_raw,
            "volatile": self.volatile,
        }


def mention_stats(mentions: Sequence[EntityMention]) -> tuple[int, set[str]]:
    """Mention count and the set of distinct surface strings."""
    return len(mentions), {m.surface for m in mentions}


def jaccard(set_a: set[str], set_b: set[str]) -> float:
    """|A∩B| / |A∪B|, with jaccard(∅,∅) = 1.0 (identical empty inventories)."""
    if not set_a and not set_b:
        return 1.0
    return len(set_a & set_b) / len(set_a | set_b)


def _project(mention: EntityMention, variant: Variant) -> tuple[int, int]:
    return variant.offset_map.to_base((mention.start, mention.end))


def _intersection(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def align_mentions(
    mentions_a: Sequence[EntityMention],
    mentions_b: Sequence[EntityMention],
    variant_a: Variant,
    variant_b: Variant,
) -> Alignment:
    """Project both mention sets to base coordinates and match greedily by
    largest base-interval intersection (ties by smaller base start); each
    mention is matched at most once."""
    if variant_a.doc_id != variant_b.doc_id:
        raise AnalysisError(
            f"variants come from different documents: {variant_a.doc_id!r} vs {variant_b.doc_id!r}"
        )
    if variant_a.trace.base_digest != variant_b.trace.base_digest:
        raise AnalysisError("variants are anchored to different base texts")

    proj_a = [(m, _project(m, variant_a)) for m in mentions_a]
    proj_b = [(m, _project(m, variant_b)) for m in mentions_b]

    candidates = []
    for i, (ma, base_a) in enumerate(proj_a):
        for j, (mb, base_b) in enumerate(proj_b):
            overlap = _intersection(base_a, base_b)
            if overlap > 0:
                candidates.append((-overlap, base_a[0], base_b[0], i, j))
    candidates.sort()

    used_a: set[int] = set()
    used_b: set[int] = set()
    matched: list[MatchedPair] = []
    for _, _, _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        ma, base_a = proj_a[i]
        mb, base_b = proj_b[j]
        matched.append(MatchedPair(ma, mb, base_a, base_b))
    matched.sort(key=lambda p: (p.base_a[0], p.base_a[1]))

    unmatched_a = tuple(pair for i, pair in enumerate(proj_a) if i not in used_a)
    unmatched_b = tuple(pair for j, pair in enumerate(proj_b) if j not in used_b)
    return Alignment(matched=tuple(matched), unmatched_a=unmatched_a, unmatched_b=unmatched_b)


def classify_volatility(alignment: Alignment) -> list[VolatilityRecord]:
    """Entity-level differences between two aligned variants.

    boundary_changed takes precedence over surface_changed when both hold,
    so each entity pair yields at most one record.
    """
    records: list[VolatilityRecord] = []
    for mention, base in alignment.unmatched_a:
        records.append(VolatilityRecord("removed", mention, None, base))
    for mention, base in alignment.unmatched_b:
        records.append(VolatilityRecord("added", None, mention, base))
    for pair in alignment.matched:
        if pair.base_a != pair.base_b:
            records.append(VolatilityRecord("boundary_changed", pair.mention_a, pair.mention_b, pair.base_a))
        elif pair.mention_a.surface != pair.mention_b.surface:
            records.append(VolatilityRecord("surface_changed", pair.mention_a, pair.mention_b, pair.base_a))
    records.sort(key=lambda r: (r.base_anchor[0], r.base_anchor[1], r.kind))
    return records


def attribute(
    mention: EntityMention,
    variant: Variant,
    events: Sequence[SpanEditEvent],
    window: int = DEFAULT_WINDOW,
) -> list[Attribution]:
    """Associate a mention with the applied events likely contributing to it.

    Overlap first: every applied event whose variant-space span intersects
    the mention span, at distance 0. Only if none overlap, fall back to the
    single closest event within ±window codepoints of the mention
    boundaries; ties prefer split/merge over other edit types, then higher
    confidence (absent = lowest), then event_id ascending.
    """
    applied_ids = set(variant.trace.applied_ids)
    span = (mention.start, mention.end)

    overlaps: list[Attribution] = []
    windowed: list[tuple[int, SpanEditEvent]] = []
    for event in events:
        if event.event_id not in applied_ids:
            continue
        ev_span = variant.offset_map.to_variant((event.span_start, event.span_end))
        if _intersection(ev_span, span) > 0 or (
            ev_span[0] == ev_span[1] and span[0] < ev_span[0] < span[1]
        ):
            overlaps.append(Attribution(event.event_id, "overlap", 0))
            continue
        # Distance between nearest codepoints, so an abutting span is at
        # distance 1 and window attributions always satisfy 0 < d <= window.
        if ev_span[1] <= span[0]:
            distance = span[0] - ev_span[1] + 1
        else:
            distance = ev_span[0] - span[1] + 1
        if distance <= window:
            windowed.append((distance, event))

    if overlaps:
        return sorted(overlaps, key=lambda a: a.event_id)
    if not windowed:
        return []
    windowed.sort(
        key=lambda pair: (
            pair[0],
            pair[1].edit_type not in ("split", "merge"),
            -(pair[1].confidence if pair[1].confidence is not None else -1.0),
            pair[1].event_id,
        )
    )
    distance, event = windowed[0]
    return [Attribution(event.event_id, "window", distance)]


@dataclass(frozen=True)
class ComparisonEntity:
    """One entity in a two-variant comparison: a matched pair or an
    unmatched mention, with its attributions and volatility status."""

    base_anchor: tuple[int, int]
    volatile: bool
    attributions: tuple[Attribution, ...]


def build_comparison_entities(
    alignment: Alignment,
    variant_a: Variant,
    variant_b: Variant,
    events: Sequence[SpanEditEvent],
    window: int = DEFAULT_WINDOW,
) -> list[ComparisonEntity]:
    """Entity universe for signal-utility rates: every matched pair and every
    unmatched mention, each attributed in its own variant's coordinates."""
    entities: list[ComparisonEntity] = []
    for pair in alignment.matched:
        attrs = attribute(pair.mention_a, variant_a, events, window) + attribute(
            pair.mention_b, variant_b, events, window
        )
        # Dedup by event, keeping the closest attribution for each.
        dedup = {a.event_id: a for a in sorted(attrs, key=lambda a: (a.distance, a.event_id), reverse=True)}
        entities.append(
            ComparisonEntity(
                base_anchor=pair.base_a,
                volatile=pair.base_a != pair.base_b or pair.mention_a.surface != pair.mention_b.surface,
                attributions=tuple(sorted(dedup.values(), key=lambda a: a.event_id)),
            )
        )
    for mention, base in alignment.unmatched_a:
        attrs = attribute(mention, variant_a, events, window)
        entities.append(ComparisonEntity(base, True, tuple(attrs)))
    for mention, base in alignment.unmatched_b:
        attrs = attribute(mention, variant_b, events, window)
        entities.append(ComparisonEntity(base, True, tuple(attrs)))
    return entities


def signal_utility(
    entities: Sequence[ComparisonEntity],
    all_events: Sequence[SpanEditEvent],
    signals: dict[str, Callable[[SpanEditEvent], bool]] | None = None,
) -> list[SignalUtilityRow]:
    """Per signal: event prevalence, volatility rate among flagged vs
    unflagged entities, and the lift between the two. An entity counts as
    flagged if any attributed event satisfies the signal predicate."""
    signals = signals if signals is not None else BUILTIN_SIGNALS
    rows = []
    for name, predicate in signals.items():
        flagged_event_ids = {e.event_id for e in all_events if predicate(e)}
        prevalence = len(flagged_event_ids) / len(all_events) if all_events else 0.0

        flagged, unflagged = [], []
        for ent in entities:
            if any(a.event_id in flagged_event_ids for a in ent.attributions):
                flagged.append(ent)
            else:
                unflagged.append(ent)

        flagged_rate = (
            sum(1 for ent in flagged if ent.volatile) / len(flagged) if flagged else UNDEFINED
        )
        unflagged_rate = (
            sum(1 for ent in unflagged if ent.volatile) / len(unflagged) if unflagged else UNDEFINED
        )
        if isinstance(flagged_rate, float) and isinstance(unflagged_rate, float) and unflagged_rate > 0:
            lift = flagged_rate / unflagged_rate
        else:
            lift = UNDEFINED
        rows.append(SignalUtilityRow(name, prevalence, flagged_rate, unflagged_rate, lift))
    return rows


def lift(flagged_rate: float, unflagged_rate: float) -> float | str:
    """Ratio of flagged to unflagged volatility rates; undefined (never
    infinity) when the unflagged rate is zero."""
    if unflagged_rate == 0:
        return UNDEFINED
    return flagged_rate / unflagged_rate


def linking_coverage(mentions: Sequence[EntityMention]) -> float:
    """Fraction of mentions carrying a KB identifier; 0.0 for no mentions."""
    if not mentions:
        return 0.0
    return sum(1 for m in mentions if m.kb_id is not None) / len(mentions)


def link_stability(matched: Sequence[MatchedPair]) -> float | str:
    """Among matched pairs where both sides carry a kb_id, the fraction
    resolving to the same identifier; undefined with no such pairs."""
    linked = [p for p in matched if p.mention_a.kb_id is not None and p.mention_b.kb_id is not None]
    if not linked:
        return UNDEFINED
    return sum(1 for p in linked if p.mention_a.kb_id == p.mention_b.kb_id) / len(linked)


def sample_attribution_pairs(
    records: Sequence[VolatilityRecord], n: int, seed: int
) -> list[dict]:
    """Deterministic random sample of (entity, attributed event) pairs as a
    judgment worksheet: entity context, event details, empty yes/no field."""
    pairs = []
    for idx, record in enumerate(records):
        mention = record.mention_b or record.mention_a
        for attr in record.attributed_events:
            pairs.append((idx, record, mention, attr))
    if n > len(pairs):
        raise AnalysisError(f"requested {n} pairs but only {len(pairs)} attributed pairs exist")
    rng = random.Random(seed)
    sample = rng.sample(pairs, n)
    worksheet = []
    for row_id, (idx, record, mention, attr) in enumerate(sample):
        worksheet.append(
            {
                "row_id": row_id,
                "record_index": idx,
                "kind": record.kind,
                "doc_id": mention.doc_id if mention else None,
                "surface": mention.surface if mention else None,
                "mention_span": [mention.start, mention.end] if mention else None,
                "event_id": attr.event_id,
                "method": attr.method,
                "distance": attr.distance,
                "judgment": None,
            }
        )
    return worksheet


def add_worksheet_context(worksheet: list[dict], variant_texts: dict[str, str]) -> None:
    """Attach ±80-codepoint context snippets where the variant text is known.
    Keyed by doc_id; mutates the worksheet rows in place."""
    for row in worksheet:
        text = variant_texts.get(row.get("doc_id") or "")
        span = row.get("mention_span")
        if text is None or span is None:
            row.setdefault("context", None)
            continue
        start, end = span
        row["context"] = text[max(0, start - CONTEXT_CHARS) : min(len(text), end + CONTEXT_CHARS)]


def attribution_precision(worksheet: Sequence[dict]) -> float:
    """Precision of the attribution heuristic over a fully judged worksheet."""
    unjudged = [row["row_id"] for row in worksheet if row.get("judgment") not in ("yes", "no")]
    if unjudged:
        raise AnalysisError(f"unjudged worksheet rows: {unjudged}")
    yes = sum(1 for row in worksheet if row["judgment"] == "yes")
    return yes / len(worksheet)


def category_summary(
    records: Sequence[VolatilityRecord], labels: dict[int, str]
) -> dict:
    """Distribution of externally supplied category labels over records,
    keyed by record index; unlabeled records reported separately.
    Percentages are of labeled records, rounded to one decimal place."""
    counts: dict[str, int] = {}
    unlabeled = 0
    for idx in range(len(records)):
        label = labels.get(idx)
        if label is None:
            unlabeled += 1
        else:
            counts[label] = counts.get(label, 0) + 1
    labeled_total = sum(counts.values())
    categories = {
        name: {"count": count, "percent": round(100.0 * count / labeled_total, 1)}
        for name, count in sorted(counts.items())
    }
    return {"categories": categories, "labeled": labeled_total, "unlabeled": unlabeled}


def read_mentions_jsonl(path: Path | str) -> list[EntityMention]:
    path = Path(path)
    mentions = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnalysisError(f"{path}: malformed JSON at line {line_no}: {exc.msg}") from exc
            try:
                mentions.append(
                    EntityMention(
                        doc_id=record["doc_id"],
                        variant_id=record["variant_id"],
                        start=record["start"],
                        end=record["end"],
                        surface=record["surface"],
                        label=record["label"],
                        kb_id=record.get("kb_id"),
                    )
                )
            except KeyError as exc:
                raise AnalysisError(f"{path}: missing field {exc.args[0]} at line {line_no}") from exc
    return mentions


def write_mentions_jsonl(mentions: Iterable[EntityMention], path: Path | str) -> None:
    from .corpus import atomic_write

    lines = [json.dumps(m.to_json(), ensure_ascii=False) for m in mentions]
    atomic_write(path, "".join(line + "\n" for line in lines))
