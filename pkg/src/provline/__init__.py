"""provline: provenance-aware OCR correction as replayable span-edit events.

Corrections are stored stand-off, anchored to an immutable base text, and
variants are reconstructed deterministically under explicit trust policies.
Downstream analysis quantifies how correction pathways change extracted
entities and ties the changes back to specific edits.
"""

from .model import (
    BaseDocument,
    DuplicateEventIdError,
    SpanEditEvent,
    ValidationReport,
    validate_event,
    validate_event_set,
)
from .offsets import OffsetMap, map_span
from .replay import (
    ApplicationTrace,
    ConflictError,
    POLICY_PRESETS,
    TrustPolicy,
    Variant,
    apply_events,
    order_events,
    parse_policy,
    reconstruct,
    resolve_conflicts,
    select_events,
)
from .analysis import (
    EntityMention,
    VolatilityRecord,
    align_mentions,
    attribute,
    attribution_precision,
    category_summary,
    classify_volatility,
    jaccard,
    link_stability,
    linking_coverage,
    mention_stats,
    sample_attribution_pairs,
    signal_utility,
)
from .corpus import Corpus, ReviewDecision, load_corpus, merge_decisions, read_events_jsonl, write_events_jsonl

__version__ = "0.1.0"
