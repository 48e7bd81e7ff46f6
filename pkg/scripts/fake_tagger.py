#!/usr/bin/env python3
"""Scripted stand-in for an external NER tagger.

Deterministic: extracts maximal runs of capitalized tokens as entity
mentions, labels them from a fixed gazetteer, and assigns KB identifiers to
known clean surfaces. Corrupted surfaces (OCR noise, split words) fall out
of the gazetteer and so lose their label specificity and KB id, which is
exactly the downstream sensitivity the fixture is meant to exhibit.
"""

from __future__ import annotations

import re

MENTION_RE = re.compile(r"\b[A-Z][a-z]+(?: (?:of )?[A-Z][a-z]+)*\b")

PER = {"Madison", "Hamilton", "Jefferson", "Franklin", "Washington", "Adams",
       "Lafayette", "Montgomery", "Sherman", "Livingston", "Pinckney", "Carroll"}
LOC = {"New York", "Boston", "Philadelphia", "Charleston", "Richmond", "Albany",
       "Savannah", "Baltimore", "Trenton", "Annapolis"}
ORG = {"Continental Congress", "Assembly", "Committee of Safety", "Provincial Council"}

KB = {surface: f"kb:{surface.lower().replace(' ', '_')}" for surface in PER | LOC | ORG}


def label_for(surface: str) -> str:
    if surface in PER:
        return "PER"
    if surface in LOC:
        return "LOC"
    if surface in ORG:
        return "ORG"
    return "MISC"


def tag_text(text: str, doc_id: str, variant_id: str) -> list[dict]:
    mentions = []
    for match in MENTION_RE.finditer(text):
        surface = match.group(0)
        record = {
            "doc_id": doc_id,
            "variant_id": variant_id,
            "start": match.start(),
            "end": match.end(),
            "surface": surface,
            "label": label_for(surface),
        }
        kb_id = KB.get(surface)
        if kb_id is not None:
            record["kb_id"] = kb_id
        mentions.append(record)
    return mentions
