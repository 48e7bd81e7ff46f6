"""Corpus-level pipelines: validation, reconstruction, two-variant diffs,
and the policy sweep. These are the operations the CLI and the review API
expose; everything here is a pure function of corpus bytes plus flags."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from . import analysis
from .analysis import (
    Alignment,
    Attribution,
    EntityMention,
    VolatilityRecord,
    read_mentions_jsonl,
)
from .corpus import Corpus, CorpusError
from .model import SpanEditEvent, validate_event_set
from .replay import TrustPolicy, Variant, reconstruct


def validate_corpus(corpus: Corpus) -> dict:
    """Run the full record-level check over every document's events."""
    failures = []
    total = 0
    for doc_id, doc in sorted(corpus.documents.items()):
        events = corpus.events_for(doc_id, merged=False)
        total += len(events)
        reports, groups = validate_event_set(events, doc)
        for report in reports:
            if not report.overall:
                failures.append(
                    {
                        "doc_id": doc_id,
                        "event_id": report.event_id,
                        "failures": [
                            {"check": v.check, "message": v.message} for v in report.failures()
                        ],
                    }
                )
    return {"events_checked": total, "failures": failures, "ok": not failures}


def reconstruct_corpus(
    corpus: Corpus, policy: TrustPolicy, conflict_mode: str = "error"
) -> dict[str, Variant]:
    events = corpus.effective_events()
    variants = {}
    for doc_id, doc in sorted(corpus.documents.items()):
        doc_events = [e for e in events if e.doc_id == doc_id]
        variants[doc_id] = reconstruct(doc, doc_events, policy, conflict_mode)
    return variants


def load_mentions(corpus: Corpus, policy_name: str, doc_id: str) -> list[EntityMention]:
    path = corpus.mentions_path(policy_name, doc_id)
    if not path.exists():
        raise CorpusError(f"missing mentions file: {path}")
    return read_mentions_jsonl(path)


def attach_attributions(
    records: list[VolatilityRecord],
    variant_a: Variant,
    variant_b: Variant,
    events: Sequence[SpanEditEvent],
    window: int = analysis.DEFAULT_WINDOW,
) -> list[VolatilityRecord]:
    """Attribute each record via the mention present in its own variant;
    removed entities attribute against variant A, everything else against B."""
    out = []
    for record in records:
        if record.kind == "removed":
            attrs = analysis.attribute(record.mention_a, variant_a, events, window)
        else:
            attrs = analysis.attribute(record.mention_b, variant_b, events, window)
        out.append(record.with_attributions(attrs))
    return out


def _unreviewed_share(records: Sequence[VolatilityRecord], events: Sequence[SpanEditEvent]):
    """Share of volatile entities linked to at least one unreviewed edit."""
    if not records:
        return analysis.UNDEFINED
    status = {e.event_id: e.review_status for e in events}
    unreviewed = sum(
        1
        for r in records
        if r.attributed_events
        and any(status.get(a.event_id) != "approved" for a in r.attributed_events)
    )
    return unreviewed / len(records)


def diff_variants(
    corpus: Corpus,
    policy_a: TrustPolicy,
    policy_b: TrustPolicy,
    conflict_mode: str = "resolve",
    mentions_a: dict[str, list[EntityMention]] | None = None,
    mentions_b: dict[str, list[EntityMention]] | None = None,
    window: int = analysis.DEFAULT_WINDOW,
) -> dict:
    """Two-variant volatility report over the whole corpus.

    Mentions default to the stored per-policy files; pass explicit dicts
    (doc_id -> mentions) to diff externally produced NER output.
    """
    events = corpus.effective_events()
    variants_a = reconstruct_corpus(corpus, policy_a, conflict_mode)
    variants_b = reconstruct_corpus(corpus, policy_b, conflict_mode)

    all_a: list[EntityMention] = []
    all_b: list[EntityMention] = []
    all_records: list[dict] = []
    volatile_records: list[VolatilityRecord] = []
    kinds = {"added": 0, "removed": 0, "surface_changed": 0, "boundary_changed": 0}
    entities: list[analysis.ComparisonEntity] = []

    for doc_id in sorted(corpus.documents):
        m_a = mentions_a[doc_id] if mentions_a is not None else load_mentions(corpus, policy_a.name, doc_id)
        m_b = mentions_b[doc_id] if mentions_b is not None else load_mentions(corpus, policy_b.name, doc_id)
        all_a.extend(m_a)
        all_b.extend(m_b)
        va, vb = variants_a[doc_id], variants_b[doc_id]
        doc_events = [e for e in events if e.doc_id == doc_id]
        alignment = analysis.align_mentions(m_a, m_b, va, vb)
        records = analysis.classify_volatility(alignment)
        records = attach_attributions(records, va, vb, doc_events, window)
        volatile_records.extend(records)
        entities.extend(analysis.build_comparison_entities(alignment, va, vb, doc_events, window))
        for record in records:
            kinds[record.kind] += 1
            payload = record.to_json()
            payload["doc_id"] = doc_id
            all_records.append(payload)

    count_a, unique_a = analysis.mention_stats(all_a)
    count_b, unique_b = analysis.mention_stats(all_b)
    return {
        "policy_a": policy_a.descriptor(),
        "policy_b": policy_b.descriptor(),
        "mentions_a": count_a,
        "mentions_b": count_b,
        "unique_a": len(unique_a),
        "unique_b": len(unique_b),
        "jaccard": analysis.jaccard(unique_a, unique_b),
        "volatile": len(all_records),
        "kinds": kinds,
        "pct_unreviewed": _unreviewed_share(volatile_records, events),
        "signal_utility": [row.to_json() for row in analysis.signal_utility(entities, events)],
        "records": all_records,
    }


def sweep_emit(
    corpus: Corpus,
    policies: Sequence[TrustPolicy],
    out_dir: Path | str,
    conflict_mode: str = "resolve",
) -> dict[str, dict[str, Variant]]:
    """Phase 1: write each policy's reconstructed variant texts (plus traces)
    for an external tagger to consume."""
    from .corpus import atomic_write
    import json

    out_dir = Path(out_dir)
    emitted = {}
    for policy in policies:
        variants = reconstruct_corpus(corpus, policy, conflict_mode)
        emitted[policy.name] = variants
        for doc_id, variant in variants.items():
            base = out_dir / "variants" / policy.name
            atomic_write(base / f"{doc_id}.txt", variant.text)
            atomic_write(
                base / f"{doc_id}.trace.json",
                json.dumps(
                    {"variant_id": variant.variant_id, **variant.trace.to_json()},
                    indent=2,
                    ensure_ascii=False,
                )
                + "\n",
            )
    return emitted


def sweep_report(
    corpus: Corpus,
    policies: Sequence[TrustPolicy],
    raw_policy_name: str = "raw",
    conflict_mode: str = "resolve",
) -> list[analysis.SweepRow]:
    """Phase 2: ingest per-(doc, policy) mention files and build the
    threshold-sensitivity table, with jaccard and volatility against the
    raw row."""
    names = [p.name for p in policies]
    if raw_policy_name not in names:
        raise CorpusError(f"sweep requires the {raw_policy_name!r} policy as baseline")

    per_policy_mentions: dict[str, dict[str, list[EntityMention]]] = {}
    for policy in policies:
        per_policy_mentions[policy.name] = {
            doc_id: load_mentions(corpus, policy.name, doc_id) for doc_id in sorted(corpus.documents)
        }

    raw_policy = next(p for p in policies if p.name == raw_policy_name)
    raw_variants = reconstruct_corpus(corpus, raw_policy, conflict_mode)
    raw_all = [m for ms in per_policy_mentions[raw_policy_name].values() for m in ms]
    _, raw_unique = analysis.mention_stats(raw_all)

    rows = []
    for policy in policies:
        mentions_by_doc = per_policy_mentions[policy.name]
        flat = [m for ms in mentions_by_doc.values() for m in ms]
        count, unique = analysis.mention_stats(flat)
        if policy.name == raw_policy_name:
            rows.append(analysis.SweepRow(policy.name, count, len(unique), 1.0, None))
            continue
        variants = reconstruct_corpus(corpus, policy, conflict_mode)
        volatile = 0
        for doc_id in sorted(corpus.documents):
            alignment = analysis.align_mentions(
                per_policy_mentions[raw_policy_name][doc_id],
                mentions_by_doc[doc_id],
                raw_variants[doc_id],
                variants[doc_id],
            )
            volatile += len(analysis.classify_volatility(alignment))
        rows.append(
            analysis.SweepRow(
                policy.name, count, len(unique), analysis.jaccard(raw_unique, unique), volatile
            )
        )
    return rows
