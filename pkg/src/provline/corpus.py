"""Corpus layout, JSONL/CSV serialization, and the review-decision log.

Layout under a corpus root:

    manifest.json            {"documents": [{doc_id, page_id, text_path, digest}]}
    texts/<doc_id>.txt       base text, UTF-8 without BOM, read verbatim
    events.jsonl             one span-edit event per line
    decisions.jsonl          append-only review decisions (optional)
    mentions/<policy>/<doc_id>.jsonl   entity mentions per variant (optional)

Events round-trip losslessly: unknown fields on a record are preserved and
written back, in sorted order after the schema fields.
"""

from __future__ import annotations

import csv
import json
import hashlib
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .model import EVENT_FIELDS, REQUIRED_EVENT_FIELDS, REVIEW_STATUSES, BaseDocument, SpanEditEvent


class CorpusError(ValueError):
    """Malformed corpus content; message carries file/line context."""


@dataclass(frozen=True)
class ReviewDecision:
    event_id: str
    review_status: str
    reviewer_id: str
    timestamp: str  # RFC3339

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "review_status": self.review_status,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
        }


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def atomic_write(path: Path | str, data: str | bytes) -> None:
    """Write via temp file + rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_base_text(path: Path | str) -> str:
    """Read a base text verbatim. A UTF-8 BOM is an error: it would shift
    every recorded codepoint offset by one."""
    raw = Path(path).read_bytes()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise CorpusError(f"{path}: UTF-8 BOM present; base texts must be BOM-free")
    return raw.decode("utf-8")


def _event_from_record(record: dict, line_no: int, path: str) -> SpanEditEvent:
    for name in REQUIRED_EVENT_FIELDS:
        if name not in record:
            raise CorpusError(f"{path}: missing required field {name} at line {line_no}")
    known = {k: record[k] for k in EVENT_FIELDS if k in record}
    extra = {k: v for k, v in record.items() if k not in EVENT_FIELDS}
    return SpanEditEvent(extra=extra, **known)


def iter_events_jsonl(path: Path | str) -> Iterator[SpanEditEvent]:
    """Stream events from JSONL, one per non-empty line, bounded memory."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line_no == 1 and line.startswith("﻿"):
                raise CorpusError(f"{path}: UTF-8 BOM present; JSONL must be BOM-free")
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: malformed JSON at line {line_no}: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {line_no} is not a JSON object")
            yield _event_from_record(record, line_no, str(path))


def read_events_jsonl(path: Path | str) -> list[SpanEditEvent]:
    return list(iter_events_jsonl(path))


def event_to_record(event: SpanEditEvent) -> dict:
    """Stable field ordering: schema fields first (absent optionals omitted),
    then preserved unknown fields sorted by name."""
    record: dict[str, Any] = {}
    for name in EVENT_FIELDS:
        value = getattr(event, name)
        if value is not None:
            record[name] = value
    for name in sorted(event.extra):
        record[name] = event.extra[name]
    return record


def write_events_jsonl(events: Iterable[SpanEditEvent], path: Path | str) -> None:
    lines = [json.dumps(event_to_record(e), ensure_ascii=False) for e in events]
    atomic_write(path, "".join(line + "\n" for line in lines))


def export_tabular(events: Iterable[SpanEditEvent], path: Path | str, format: str = "csv") -> None:
    """One row per event, columns in schema order; absent optionals are empty
    cells; quoting per RFC 4180 via the csv module."""
    if format != "csv":
        raise ValueError(f"unsupported tabular format {format!r} (csv only)")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EVENT_FIELDS)
            for event in events:
                writer.writerow(
                    ["" if (v := getattr(event, name)) is None else v for name in EVENT_FIELDS]
                )
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_decisions_jsonl(path: Path | str) -> list[ReviewDecision]:
    path = Path(path)
    decisions = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: malformed JSON at line {line_no}: {exc.msg}") from exc
            for name in ("event_id", "review_status", "reviewer_id", "timestamp"):
                if name not in record:
                    raise CorpusError(f"{path}: missing field {name} at line {line_no}")
            if record["review_status"] not in REVIEW_STATUSES:
                raise CorpusError(
                    f"{path}: invalid review_status {record['review_status']!r} at line {line_no}"
                )
            decisions.append(
                ReviewDecision(
                    event_id=record["event_id"],
                    review_status=record["review_status"],
                    reviewer_id=record["reviewer_id"],
                    timestamp=record["timestamp"],
                )
            )
    return decisions


def append_decision(path: Path | str, decision: ReviewDecision) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(decision.to_json(), ensure_ascii=False) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def merge_decisions(
    events: list[SpanEditEvent], decisions: list[ReviewDecision]
) -> list[SpanEditEvent]:
    """Effective review state: the last decision per event wins, ordered by
    (timestamp, then log position). Pure; a decision for an unknown event_id
    is an audit-integrity error."""
    known = {e.event_id for e in events}
    for d in decisions:
        if d.event_id not in known:
            raise CorpusError(f"decision references unknown event_id {d.event_id!r}")
    effective: dict[str, ReviewDecision] = {}
    for position, d in sorted(enumerate(decisions), key=lambda p: (p[1].timestamp, p[0])):
        effective[d.event_id] = d
    merged = []
    for event in events:
        d = effective.get(event.event_id)
        if d is None:
            merged.append(event)
        else:
            merged.append(event.with_review(d.review_status, d.reviewer_id))
    return merged


@dataclass(frozen=True)
class ManifestEntry:
    doc_id: str
    page_id: str | int
    text_path: str
    digest: str


@dataclass
class Corpus:
    """In-memory view of a corpus root: base documents, events, decisions."""

    root: Path
    documents: dict[str, BaseDocument]
    events: list[SpanEditEvent]
    decisions: list[ReviewDecision]

    @property
    def decisions_path(self) -> Path:
        return self.root / "decisions.jsonl"

    def effective_events(self) -> list[SpanEditEvent]:
        return merge_decisions(self.events, self.decisions)

    def events_for(self, doc_id: str, merged: bool = True) -> list[SpanEditEvent]:
        pool = self.effective_events() if merged else self.events
        return [e for e in pool if e.doc_id == doc_id]

    def mentions_path(self, policy_name: str, doc_id: str) -> Path:
        return self.root / "mentions" / policy_name / f"{doc_id}.jsonl"


def load_corpus(root: Path | str) -> Corpus:
    """Load and cross-check a corpus root against its manifest."""
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise CorpusError(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    documents: dict[str, BaseDocument] = {}
    for entry in manifest["documents"]:
        text_path = root / entry["text_path"]
        raw = text_path.read_bytes()
        digest = sha256_hex(raw)
        if digest != entry["digest"]:
            raise CorpusError(
                f"{text_path}: digest mismatch (manifest {entry['digest'][:12]}…, file {digest[:12]}…)"
            )
        text = read_base_text(text_path)
        documents[entry["doc_id"]] = BaseDocument(
            doc_id=entry["doc_id"], page_id=entry["page_id"], text=text
        )

    events_path = root / "events.jsonl"
    events = read_events_jsonl(events_path) if events_path.exists() else []
    for event in events:
        if event.doc_id not in documents:
            raise CorpusError(f"event {event.event_id} references unknown doc_id {event.doc_id!r}")

    decisions_path = root / "decisions.jsonl"
    decisions = read_decisions_jsonl(decisions_path) if decisions_path.exists() else []
    return Corpus(root=root, documents=documents, events=events, decisions=decisions)


def write_manifest(root: Path | str, entries: list[ManifestEntry]) -> None:
    payload = {
        "documents": [
            {
                "doc_id": e.doc_id,
                "page_id": e.page_id,
                "text_path": e.text_path,
                "digest": e.digest,
            }
            for e in entries
        ]
    }
    atomic_write(Path(root) / "manifest.json", json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
