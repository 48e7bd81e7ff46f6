import random
import shutil
from pathlib import Path

import pytest

from provline.model import BaseDocument, SpanEditEvent

FIXTURE_CORPUS = Path(__file__).resolve().parents[1] / "fixtures" / "corpus"


def make_event(
    event_id="e1",
    doc_id="d1",
    span=(0, 7),
    orig="Madifon",
    new="Madison",
    edit_type="substitute",
    source="model",
    confidence=0.74,
    review_status="unreviewed",
    **kwargs,
):
    return SpanEditEvent(
        schema_version=kwargs.pop("schema_version", "1.0.0"),
        event_id=event_id,
        doc_id=doc_id,
        page_id=kwargs.pop("page_id", 1),
        base_revision=kwargs.pop("base_revision", 0),
        span_start=span[0],
        span_end=span[1],
        orig_text=orig,
        new_text=new,
        edit_type=edit_type,
        source=source,
        confidence=confidence,
        review_status=review_status,
        **kwargs,
    )


@pytest.fixture
def base_doc():
    return BaseDocument(doc_id="d1", page_id=1, text="Madifon went to NewYork.")


@pytest.fixture
def madifon_event():
    return make_event()


@pytest.fixture
def split_event():
    return make_event(
        event_id="e2",
        span=(16, 23),
        orig="NewYork",
        new="New York",
        edit_type="split",
        source="rule",
        confidence=0.9,
        review_status=None,
    )


@pytest.fixture
def fixture_corpus_root():
    assert FIXTURE_CORPUS.is_dir(), "fixture corpus missing; run scripts/make_fixture_corpus.py"
    return FIXTURE_CORPUS


@pytest.fixture
def fixture_corpus_copy(tmp_path):
    """Writable copy of the fixture corpus for tests that mutate files."""
    dest = tmp_path / "corpus"
    shutil.copytree(FIXTURE_CORPUS, dest)
    return dest


ALPHABET = "abcdefg hijklmno\npqrs tuvwxyz ÄéußЖ-"


def random_base_text(rng: random.Random, max_len=200) -> str:
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, max_len)))


def random_nonoverlapping_events(rng: random.Random, doc: BaseDocument, max_events=10):
    """Random valid, pairwise non-overlapping events over doc, all edit types
    including zero-width inserts and multi-line normalize spans."""
    n = len(doc.text)
    count = rng.randint(0, max_events)
    cuts = sorted(rng.sample(range(n + 1), min(2 * count, n + 1)))
    spans = list(zip(cuts[::2], cuts[1::2]))
    rng.shuffle(spans)
    events = []
    for i, (s, e) in enumerate(spans):
        edit_type = rng.choice(["substitute", "insert", "delete", "split", "merge", "normalize"])
        if edit_type == "insert":
            e = s
            orig = ""
            new = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 5)))
        elif edit_type == "delete":
            if s == e:
                continue
            orig = doc.text[s:e]
            new = ""
        else:
            if s == e:
                continue
            orig = doc.text[s:e]
            new = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 8))) or "x"
        events.append(
            make_event(
                event_id=f"ev{i:02d}-{rng.randint(0, 999)}",
                span=(s, e),
                orig=orig,
                new=new,
                edit_type=edit_type,
                source=rng.choice(["rule", "model", "human"]),
                confidence=rng.choice([None, 0.3, 0.6, 0.74, 0.9]),
                review_status=rng.choice([None, "unreviewed", "approved"]),
            )
        )
    return events


def oracle_apply_right_to_left(text: str, events) -> str:
    """Independent replay oracle: one replacement at a time, highest
    span_start first (inserts after replacements at the same start, and in
    reverse event_id order within a position, to mirror left-to-right
    event_id application)."""
    ordered = sorted(
        events,
        key=lambda e: (e.span_start, e.span_start != e.span_end, e.event_id),
        reverse=True,
    )
    for event in ordered:
        assert text[event.span_start : event.span_end] == event.orig_text
        text = text[: event.span_start] + event.new_text + text[event.span_end :]
    return text
