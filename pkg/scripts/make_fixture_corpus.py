#!/usr/bin/env python3
"""Generate the synthetic fixture corpus under fixtures/corpus/.

Deterministic (fixed seed): ~20 documents of pseudo-historical text with
planted OCR-style corruptions, one correction event per corruption, and
per-policy mention files produced by the scripted tagger. Confidences and
approvals are constructed so the preset policies nest:

    approved ⊆ conf85 ⊆ conf70 ⊆ conf50 ⊆ all

Corruptions never overlap, so every policy replays conflict-free.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "scripts"))

from provline.corpus import ManifestEntry, sha256_hex, write_events_jsonl, write_manifest
from provline.model import BaseDocument, SpanEditEvent
from provline.replay import POLICY_PRESETS, reconstruct

from fake_tagger import tag_text

SEED = 20260823
N_DOCS = 20

NAMES = [
    "Madison", "Hamilton", "Jefferson", "Franklin", "Washington", "Adams",
    "Lafayette", "Montgomery", "Sherman", "Livingston", "Pinckney", "Carroll",
]
PLACES = [
    "New York", "Boston", "Philadelphia", "Charleston", "Richmond", "Albany",
    "Savannah", "Baltimore", "Trenton", "Annapolis",
]
ORGS = ["Continental Congress", "Assembly", "Committee of Safety", "Provincial Council"]

FILLER = (
    "the letters were carried by post and read aloud in the market square before "
    "the assembly convened to consider the petition of the merchants and farmers "
    "whose grievances had accumulated over the long winter months while supplies "
    "ran short and prices rose beyond reason in every town along the coast"
).split()

OCR_SUBS = [("s", "f"), ("e", "c"), ("o", "0"), ("n", "u"), ("i", "l"), ("m", "rn")]


def corrupt_name(rng: random.Random, name: str) -> str:
    """Single-character OCR-style corruption of a proper noun."""
    for _ in range(20):
        good, bad = rng.choice(OCR_SUBS)
        lowered = name.lower()
        if good in lowered[1:]:
            idx = 1 + lowered[1:].index(good)
            return name[:idx] + bad + name[idx + 1 :]
    return name[:-1] + "x"


def build_doc(rng: random.Random, doc_id: str, page_id: int):
    """Assemble a document: clean target tokens interleaved with filler, then
    plant corruptions and the events that repair them."""
    pieces: list[str] = []
    plans: list[dict] = []  # corruption plans over the final text

    n_sentences = rng.randint(22, 30)
    for _ in range(n_sentences):
        words = [rng.choice(FILLER) for _ in range(rng.randint(4, 9))]
        entity_kind = rng.random()
        if entity_kind < 0.45:
            entity = rng.choice(NAMES)
        elif entity_kind < 0.8:
            entity = rng.choice(PLACES)
        else:
            entity = rng.choice(ORGS)
        insert_at = rng.randint(1, len(words) - 1)
        words.insert(insert_at, entity)
        sentence = " ".join(words) + "."
        pieces.append(sentence)
    text = " ".join(pieces)

    # Plant corruptions: walk entity occurrences and corrupt a subset.
    events: list[SpanEditEvent] = []
    corrupted = text
    offset_shift = 0
    cursor = 0
    entity_pool = sorted(set(NAMES + PLACES + ORGS), key=len, reverse=True)
    occupied: list[tuple[int, int]] = []

    occurrences = []
    pos = 0
    while pos < len(text):
        hit = None
        for entity in entity_pool:
            if text.startswith(entity, pos):
                hit = entity
                break
        if hit:
            occurrences.append((pos, hit))
            pos += len(hit)
        else:
            pos += 1

    event_n = 0
    for pos, entity in occurrences:
        roll = rng.random()
        if roll > 0.85:
            continue  # leave clean
        event_n += 1
        event_id = f"{doc_id}-e{event_n:03d}"
        if " " in entity and roll < 0.25:
            # merge corruption: drop the space ("New York" -> "NewYork");
            # repaired by a split event
            sp = entity.index(" ")
            bad = entity.replace(" ", "", 1)
            plans.append(
                {
                    "pos": pos,
                    "orig": bad,
                    "clean": entity,
                    "edit_type": "split",
                    "event_id": event_id,
                }
            )
        elif roll < 0.55:
            bad = corrupt_name(rng, entity.split(" ")[0])
            rest = entity[len(entity.split(" ")[0]) :]
            plans.append(
                {
                    "pos": pos,
                    "orig": bad + rest,
                    "clean": entity,
                    "edit_type": "substitute",
                    "event_id": event_id,
                }
            )
        elif roll < 0.65 and len(entity.split(" ")[0]) >= 6:
            # hyphenation break inside the first token
            token = entity.split(" ")[0]
            cut = len(token) // 2
            bad = token[:cut] + "-\n" + token[cut:] + entity[len(token) :]
            plans.append(
                {
                    "pos": pos,
                    "orig": bad,
                    "clean": entity,
                    "edit_type": "normalize",
                    "event_id": event_id,
                }
            )
        else:
            # intra-word space ("Bo ston"); repaired by a merge event
            token = entity.split(" ")[0]
            cut = max(2, len(token) // 2)
            bad = token[:cut] + " " + token[cut:] + entity[len(token) :]
            plans.append(
                {
                    "pos": pos,
                    "orig": bad,
                    "clean": entity,
                    "edit_type": "merge",
                    "event_id": event_id,
                }
            )

    # Apply corruptions right-to-left to build the base (corrupted) text.
    base = text
    for plan in sorted(plans, key=lambda p: -p["pos"]):
        base = base[: plan["pos"]] + plan["orig"] + base[plan["pos"] + len(plan["clean"]) :]

    # Recompute each corruption's offsets in the corrupted base.
    shift = 0
    for plan in sorted(plans, key=lambda p: p["pos"]):
        start = plan["pos"] + shift
        end = start + len(plan["orig"])
        assert base[start:end] == plan["orig"]
        plan["span"] = (start, end)
        shift += len(plan["orig"]) - len(plan["clean"])

    for plan in sorted(plans, key=lambda p: p["span"][0]):
        start, end = plan["span"]
        source = rng.choices(["model", "rule", "human"], weights=[0.6, 0.3, 0.1])[0]
        confidence = round(rng.choice([0.35, 0.45, 0.55, 0.6, 0.72, 0.78, 0.88, 0.92, 0.97]), 2)
        approved = confidence >= 0.85 and rng.random() < 0.5
        review_status = "approved" if approved else "unreviewed"
        zone = rng.choices(["body", "header", "footnote", "caption"], weights=[0.8, 0.07, 0.08, 0.05])[0]
        events.append(
            SpanEditEvent(
                schema_version="1.0.0",
                event_id=plan["event_id"],
                doc_id=doc_id,
                page_id=page_id,
                base_revision=0,
                span_start=start,
                span_end=end,
                orig_text=plan["orig"],
                new_text=plan["clean"],
                edit_type=plan["edit_type"],
                source=source,
                confidence=confidence,
                review_status=review_status,
                reviewer_id="rev-01" if approved else None,
                layout_zone=zone,
                note="hyphenation repair" if plan["edit_type"] == "normalize" else None,
            )
        )
    return base, events


def main() -> None:
    rng = random.Random(SEED)
    out_root = REPO / "fixtures" / "corpus"
    (out_root / "texts").mkdir(parents=True, exist_ok=True)

    documents: dict[str, BaseDocument] = {}
    all_events: list[SpanEditEvent] = []
    entries: list[ManifestEntry] = []

    for n in range(1, N_DOCS + 1):
        doc_id = f"doc_{n:03d}"
        page_id = rng.randint(1, 9)
        base, events = build_doc(rng, doc_id, page_id)
        if doc_id == "doc_017":
            # plant the canonical Madifon example: a model-assisted repair at
            # confidence 0.74, unreviewed
            target = "Madison"
            if target not in base:
                base += " the clerk recorded that Madifon signed the register."
                start = base.index("Madifon")
            else:
                start = base.index(target)
                base = base[:start] + "Madifon" + base[start + len(target) :]
            events.append(
                SpanEditEvent(
                    schema_version="1.0.0",
                    event_id=f"{doc_id}-madifon",
                    doc_id=doc_id,
                    page_id=page_id,
                    base_revision=0,
                    span_start=start,
                    span_end=start + 7,
                    orig_text="Madifon",
                    new_text="Madison",
                    edit_type="substitute",
                    source="model",
                    confidence=0.74,
                    review_status="unreviewed",
                    layout_zone="body",
                )
            )
        doc = BaseDocument(doc_id=doc_id, page_id=page_id, text=base)
        documents[doc_id] = doc
        all_events.extend(events)
        text_path = f"texts/{doc_id}.txt"
        (out_root / text_path).write_text(base, encoding="utf-8")
        entries.append(
            ManifestEntry(
                doc_id=doc_id,
                page_id=page_id,
                text_path=text_path,
                digest=sha256_hex(base.encode("utf-8")),
            )
        )

    write_manifest(out_root, entries)
    write_events_jsonl(all_events, out_root / "events.jsonl")

    # Scripted tagger output per (policy, doc): the external-NER stand-in.
    for policy_name, policy in POLICY_PRESETS.items():
        for doc_id, doc in documents.items():
            doc_events = [e for e in all_events if e.doc_id == doc_id]
            variant = reconstruct(doc, doc_events, policy, conflict_mode="error")
            mentions = tag_text(variant.text, doc_id, variant.variant_id)
            mention_dir = out_root / "mentions" / policy_name
            mention_dir.mkdir(parents=True, exist_ok=True)
            with (mention_dir / f"{doc_id}.jsonl").open("w", encoding="utf-8") as fh:
                for mention in mentions:
                    fh.write(json.dumps(mention, ensure_ascii=False) + "\n")

    print(f"wrote {len(documents)} documents, {len(all_events)} events to {out_root}")


if __name__ == "__main__":
    main()
