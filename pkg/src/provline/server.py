"""Review HTTP service: events, on-demand variants, a priority queue for
human triage, and the append-only review-decision endpoint.

The service is a pure function of corpus bytes plus the decisions log:
every GET is reproducible after restart, and every POSTed decision is
durable (fsync'd to the log) before the response is sent. Writes are
serialized through one lock; reads see a consistent decision-log prefix.
"""

from __future__ import annotations

import os
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import analysis, pipeline
from .corpus import CorpusError, ReviewDecision, append_decision, load_corpus, merge_decisions
from .model import REVIEW_STATUSES, SpanEditEvent
from .replay import POLICY_PRESETS, Variant, reconstruct

CONTEXT_CHARS = 80

#: Priority weights proportional to each signal's observed volatility lift,
#: normalized to sum to 1. Higher score = review first.
DEFAULT_PRIORITY_WEIGHTS = {
    "split_merge": 3.3,
    "low_confidence": 2.7,
    "non_body_zone": 2.6,
    "unreviewed": 1.7,
}


def priority_score(event: SpanEditEvent, weights: dict[str, float] | None = None) -> float:
    weights = weights or DEFAULT_PRIORITY_WEIGHTS
    total = sum(weights.values())
    score = 0.0
    for name, weight in weights.items():
        if analysis.BUILTIN_SIGNALS[name](event):
            score += weight
    return score / total


def _event_json(event: SpanEditEvent) -> dict:
    from .corpus import event_to_record

    return event_to_record(event)


class ReviewBody(BaseModel):
    review_status: str
    reviewer_id: str


class ReviewState:
    """In-memory corpus view plus the mutable decision log."""

    def __init__(self, corpus_root: str | Path, priority_weights: dict[str, float] | None = None):
        self.corpus = load_corpus(corpus_root)
        self.priority_weights = priority_weights or DEFAULT_PRIORITY_WEIGHTS
        self.decisions = list(self.corpus.decisions)
        self._write_lock = threading.Lock()
        self._variant_cache: dict[tuple[str, str, int], Variant] = {}

    def effective_events(self) -> list[SpanEditEvent]:
        return merge_decisions(self.corpus.events, self.decisions)

    def event_by_id(self, event_id: str) -> SpanEditEvent | None:
        for event in self.effective_events():
            if event.event_id == event_id:
                return event
        return None

    def record_decision(self, event_id: str, review_status: str, reviewer_id: str) -> ReviewDecision:
        decision = ReviewDecision(
            event_id=event_id,
            review_status=review_status,
            reviewer_id=reviewer_id,
            timestamp=datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        )
        with self._write_lock:
            append_decision(self.corpus.decisions_path, decision)
            self.decisions.append(decision)
            self._variant_cache.clear()
        return decision

    def variant(self, doc_id: str, policy_name: str) -> Variant:
        key = (doc_id, policy_name, len(self.decisions))
        cached = self._variant_cache.get(key)
        if cached is not None:
            return cached
        doc = self.corpus.documents[doc_id]
        events = [e for e in self.effective_events() if e.doc_id == doc_id]
        variant = reconstruct(doc, events, POLICY_PRESETS[policy_name], conflict_mode="resolve")
        self._variant_cache[key] = variant
        return variant

    def queue_items(self, limit: int) -> list[dict]:
        items = []
        for event in self.effective_events():
            score = priority_score(event, self.priority_weights)
            if score <= 0:
                continue
            doc = self.corpus.documents[event.doc_id]
            lo = max(0, event.span_start - CONTEXT_CHARS)
            hi = min(len(doc.text), event.span_end + CONTEXT_CHARS)
            items.append(
                {
                    "event_id": event.event_id,
                    "doc_id": event.doc_id,
                    "context": doc.text[lo:hi],
                    "context_offset": lo,
                    "event": _event_json(event),
                    "priority": score,
                    "review_status": event.review_status or "unreviewed",
                    "signals": {
                        name: analysis.BUILTIN_SIGNALS[name](event) for name in self.priority_weights
                    },
                }
            )
        items.sort(key=lambda item: (-item["priority"], item["event_id"]))
        return items[:limit]


def create_app(corpus_root: str | Path, ui_dist: str | Path | None = None) -> FastAPI:
    state = ReviewState(corpus_root)
    app = FastAPI(title="provline review API")
    app.state.review = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/policies")
    def policies():
        return {"policies": sorted(POLICY_PRESETS)}

    @app.get("/api/docs")
    def list_docs():
        events = state.effective_events()
        return [
            {
                "doc_id": doc.doc_id,
                "page_id": doc.page_id,
                "text_length": len(doc.text),
                "events": sum(1 for e in events if e.doc_id == doc.doc_id),
            }
            for doc in sorted(state.corpus.documents.values(), key=lambda d: d.doc_id)
        ]

    @app.get("/api/docs/{doc_id}/events")
    def doc_events(doc_id: str):
        if doc_id not in state.corpus.documents:
            raise HTTPException(404, detail={"error": "unknown_doc", "doc_id": doc_id})
        return [_event_json(e) for e in state.effective_events() if e.doc_id == doc_id]

    @app.get("/api/docs/{doc_id}/variants/{policy}")
    def doc_variant(doc_id: str, policy: str):
        if doc_id not in state.corpus.documents:
            raise HTTPException(404, detail={"error": "unknown_doc", "doc_id": doc_id})
        if policy not in POLICY_PRESETS:
            raise HTTPException(404, detail={"error": "unknown_policy", "policy": policy})
        variant = state.variant(doc_id, policy)
        return {
            "variant_id": variant.variant_id,
            "doc_id": doc_id,
            "policy": policy,
            "text": variant.text,
            "trace": variant.trace.to_json(),
        }

    @app.get("/api/queue")
    def queue(limit: int = Query(default=20, ge=0)):
        return {"items": state.queue_items(limit)}

    @app.post("/api/events/{event_id}/review")
    def review(event_id: str, body: ReviewBody):
        if body.review_status not in REVIEW_STATUSES:
            raise HTTPException(400, detail={"error": "invalid_status", "review_status": body.review_status})
        if state.event_by_id(event_id) is None:
            raise HTTPException(404, detail={"error": "unknown_event", "event_id": event_id})
        decision = state.record_decision(event_id, body.review_status, body.reviewer_id)
        updated = state.event_by_id(event_id)
        return {"decision": decision.to_json(), "event": _event_json(updated)}

    @app.get("/api/volatility")
    def volatility(policy_a: str, policy_b: str):
        if policy_a not in POLICY_PRESETS or policy_b not in POLICY_PRESETS:
            raise HTTPException(404, detail={"error": "unknown_policy"})
        # keep the live decision state visible to the diff
        corpus = state.corpus
        original = corpus.decisions
        corpus.decisions = list(state.decisions)
        try:
            report = pipeline.diff_variants(
                corpus, POLICY_PRESETS[policy_a], POLICY_PRESETS[policy_b], conflict_mode="resolve"
            )
        except CorpusError as exc:
            return JSONResponse(
                status_code=409,
                content={"error": "mentions_unavailable", "detail": str(exc)},
            )
        finally:
            corpus.decisions = original
        return report

    dist = Path(ui_dist) if ui_dist else Path(os.environ.get("PROVLINE_UI_DIST", "frontend/dist"))
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")

    return app
