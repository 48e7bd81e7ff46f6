import csv
import json

import pytest

from provline.corpus import (
    Corpus,
    CorpusError,
    ReviewDecision,
    append_decision,
    event_to_record,
    export_tabular,
    iter_events_jsonl,
    load_corpus,
    merge_decisions,
    read_base_text,
    read_decisions_jsonl,
    read_events_jsonl,
    write_events_jsonl,
)
from provline.model import EVENT_FIELDS, SpanEditEvent

from conftest import FIXTURE_CORPUS, make_event

CANONICAL_RECORD = {
    "schema_version": "1.0.0",
    "event_id": "c2f1",
    "doc_id": "doc_017",
    "page_id": 3,
    "base_revision": 0,
    "span_start": 1284,
    "span_end": 1291,
    "orig_text": "Madifon",
    "new_text": "Madison",
    "edit_type": "substitute",
    "source": "model",
    "confidence": 0.74,
    "review_status": "unreviewed",
    "layout_zone": "body",
}


class TestEventsJsonl:
    def write_lines(self, tmp_path, lines):
        path = tmp_path / "events.jsonl"
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    def test_canonical_record_roundtrips(self, tmp_path):
        path = self.write_lines(tmp_path, [json.dumps(CANONICAL_RECORD)])
        (event,) = read_events_jsonl(path)
        assert event.event_id == "c2f1"
        assert event.span_start == 1284 and event.span_end == 1291
        assert event.confidence == 0.74
        assert event_to_record(event) == CANONICAL_RECORD

    def test_unknown_fields_preserved(self, tmp_path):
        record = dict(CANONICAL_RECORD, zeta="keep", alpha={"nested": [1, 2]})
        path = self.write_lines(tmp_path, [json.dumps(record)])
        (event,) = read_events_jsonl(path)
        assert event.extra["zeta"] == "keep"
        out = tmp_path / "out.jsonl"
        write_events_jsonl([event], out)
        assert json.loads(out.read_text(encoding="utf-8")) == record
        # unknown fields come after schema fields, sorted
        keys = list(json.loads(out.read_text(encoding="utf-8")))
        assert keys[-2:] == ["alpha", "zeta"]

    def test_double_write_byte_stable(self, tmp_path):
        events = read_events_jsonl(FIXTURE_CORPUS / "events.jsonl")
        first = tmp_path / "a.jsonl"
        write_events_jsonl(events, first)
        second = tmp_path / "b.jsonl"
        write_events_jsonl(read_events_jsonl(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_malformed_json_reports_line_number(self, tmp_path):
        path = self.write_lines(tmp_path, [json.dumps(CANONICAL_RECORD), "{oops"])
        with pytest.raises(CorpusError) as excinfo:
            read_events_jsonl(path)
        assert "line 2" in str(excinfo.value)

    def test_missing_required_field_reports_line_number(self, tmp_path):
        record = dict(CANONICAL_RECORD)
        del record["orig_text"]
        path = self.write_lines(tmp_path, [json.dumps(record)])
        with pytest.raises(CorpusError) as excinfo:
            read_events_jsonl(path)
        assert "orig_text" in str(excinfo.value) and "line 1" in str(excinfo.value)

    def test_non_object_line_rejected(self, tmp_path):
        path = self.write_lines(tmp_path, ["[1, 2]"])
        with pytest.raises(CorpusError):
            read_events_jsonl(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = self.write_lines(tmp_path, [json.dumps(CANONICAL_RECORD), "", "  "])
        assert len(read_events_jsonl(path)) == 1

    def test_bom_rejected(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_bytes(b"\xef\xbb\xbf" + json.dumps(CANONICAL_RECORD).encode() + b"\n")
        with pytest.raises(CorpusError) as excinfo:
            read_events_jsonl(path)
        assert "BOM" in str(excinfo.value)

    def test_streaming_is_lazy(self, tmp_path):
        path = self.write_lines(tmp_path, [json.dumps(CANONICAL_RECORD), "{broken"])
        iterator = iter_events_jsonl(path)
        assert next(iterator).event_id == "c2f1"
        with pytest.raises(CorpusError):
            next(iterator)

    def test_absent_optionals_omitted(self, tmp_path):
        event = make_event(confidence=None, review_status=None)
        out = tmp_path / "out.jsonl"
        write_events_jsonl([event], out)
        record = json.loads(out.read_text(encoding="utf-8"))
        assert "confidence" not in record and "review_status" not in record


class TestBaseText:
    def test_verbatim(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("line1\nline2", encoding="utf-8")
        assert read_base_text(path) == "line1\nline2"

    def test_bom_rejected(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_bytes(b"\xef\xbb\xbfhello")
        with pytest.raises(CorpusError):
            read_base_text(path)


class TestCsvExport:
    def test_roundtrip_with_awkward_note(self, tmp_path):
        event = make_event(
            note='has "quotes", commas,\nand a newline', layout_zone="marginalia"
        )
        path = tmp_path / "events.csv"
        export_tabular([event], path)
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        (row,) = rows
        assert row["note"] == 'has "quotes", commas,\nand a newline'
        assert row["event_id"] == event.event_id
        assert int(row["span_start"]) == event.span_start

    def test_header_matches_schema_order(self, tmp_path):
        path = tmp_path / "events.csv"
        export_tabular([make_event()], path)
        with path.open(newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
        assert header == list(EVENT_FIELDS)

    def test_unsupported_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export_tabular([], tmp_path / "x.parquet", format="parquet")


class TestDecisions:
    def decision(self, event_id="e1", status="approved", reviewer="r1", ts="2026-01-01T00:00:00Z"):
        return ReviewDecision(event_id=event_id, review_status=status,
                              reviewer_id=reviewer, timestamp=ts)

    def test_append_and_read_back(self, tmp_path):
        path = tmp_path / "decisions.jsonl"
        append_decision(path, self.decision())
        append_decision(path, self.decision(status="rejected", ts="2026-01-02T00:00:00Z"))
        decisions = read_decisions_jsonl(path)
        assert [d.review_status for d in decisions] == ["approved", "rejected"]

    def test_last_timestamp_wins(self, madifon_event):
        decisions = [
            self.decision(ts="2026-01-02T00:00:00Z", status="rejected"),
            self.decision(ts="2026-01-01T00:00:00Z", status="approved"),
        ]
        (merged,) = merge_decisions([madifon_event], decisions)
        assert merged.review_status == "rejected"

    def test_same_timestamp_later_log_position_wins(self, madifon_event):
        decisions = [
            self.decision(status="approved"),
            self.decision(status="rejected"),
        ]
        (merged,) = merge_decisions([madifon_event], decisions)
        assert merged.review_status == "rejected"

    def test_reviewer_id_carried(self, madifon_event):
        (merged,) = merge_decisions([madifon_event], [self.decision(reviewer="alice")])
        assert merged.reviewer_id == "alice"

    def test_unknown_event_id_rejected(self, madifon_event):
        with pytest.raises(CorpusError):
            merge_decisions([madifon_event], [self.decision(event_id="ghost")])

    def test_merge_is_pure_and_idempotent(self, madifon_event):
        decisions = [self.decision()]
        once = merge_decisions([madifon_event], decisions)
        twice = merge_decisions(once, decisions)
        assert once == twice
        assert madifon_event.review_status == "unreviewed"

    def test_invalid_status_in_log(self, tmp_path):
        path = tmp_path / "decisions.jsonl"
        path.write_text(json.dumps({
            "event_id": "e1", "review_status": "maybe",
            "reviewer_id": "r", "timestamp": "2026-01-01T00:00:00Z",
        }) + "\n", encoding="utf-8")
        with pytest.raises(CorpusError):
            read_decisions_jsonl(path)


class TestLoadCorpus:
    def test_fixture_corpus_loads(self):
        corpus = load_corpus(FIXTURE_CORPUS)
        assert len(corpus.documents) == 20
        assert all(e.doc_id in corpus.documents for e in corpus.events)

    def test_digest_mismatch_detected(self, tmp_path, fixture_corpus_copy):
        text_file = next((fixture_corpus_copy / "texts").glob("*.txt"))
        text_file.write_text(text_file.read_text(encoding="utf-8") + "!", encoding="utf-8")
        with pytest.raises(CorpusError) as excinfo:
            load_corpus(fixture_corpus_copy)
        assert "digest" in str(excinfo.value)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(CorpusError):
            load_corpus(tmp_path)

    def test_event_for_unknown_doc_rejected(self, fixture_corpus_copy):
        with (fixture_corpus_copy / "events.jsonl").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(dict(CANONICAL_RECORD, doc_id="ghost", event_id="g1")) + "\n")
        with pytest.raises(CorpusError):
            load_corpus(fixture_corpus_copy)

    def test_effective_events_apply_decision_log(self, fixture_corpus_copy):
        corpus = load_corpus(fixture_corpus_copy)
        target = corpus.events[0]
        append_decision(corpus.decisions_path, ReviewDecision(
            event_id=target.event_id, review_status="approved",
            reviewer_id="r9", timestamp="2026-08-01T00:00:00Z"))
        reloaded = load_corpus(fixture_corpus_copy)
        merged = {e.event_id: e for e in reloaded.effective_events()}
        assert merged[target.event_id].review_status == "approved"
        # raw log untouched
        assert reloaded.events[0].review_status == target.review_status
