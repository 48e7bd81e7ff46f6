import random

import pytest

from provline.model import BaseDocument, DuplicateEventIdError
from provline.replay import (
    POLICY_PRESETS,
    ApplyIntegrityError,
    ConflictError,
    TrustPolicy,
    apply_events,
    order_events,
    parse_policy,
    reconstruct,
    resolve_conflicts,
    select_events,
)

from conftest import (
    make_event,
    oracle_apply_right_to_left,
    random_base_text,
    random_nonoverlapping_events,
)


class TestSelectEvents:
    def test_confidence_threshold_selects_madifon(self, madifon_event):
        policy = TrustPolicy(name="conf70", min_confidence=0.70)
        selected, skipped = select_events([madifon_event], policy)
        assert selected == [madifon_event] and skipped == []

    def test_require_approved_skips_unreviewed(self, madifon_event):
        policy = TrustPolicy(name="approved", require_approved=True)
        selected, skipped = select_events([madifon_event], policy)
        assert selected == []
        assert skipped[0].outcome == "skipped_policy"

    def test_rejected_veto_under_all_corrections(self):
        event = make_event(review_status="rejected")
        selected, skipped = select_events([event], POLICY_PRESETS["all"])
        assert selected == []
        assert skipped[0].outcome == "excluded_rejected"

    def test_missing_confidence_fails_threshold(self):
        event = make_event(confidence=None)
        selected, _ = select_events([event], TrustPolicy(name="t", min_confidence=0.5))
        assert selected == []

    def test_allowed_sources_filter(self, madifon_event):
        policy = TrustPolicy(name="humans", allowed_sources=frozenset({"human"}))
        selected, _ = select_events([madifon_event], policy)
        assert selected == []

    def test_raw_preset_selects_nothing(self, madifon_event, split_event):
        selected, skipped = select_events([madifon_event, split_event], POLICY_PRESETS["raw"])
        assert selected == [] and len(skipped) == 2


class TestOrderEvents:
    def test_sorted_by_span_start(self):
        a = make_event(event_id="a", span=(16, 23), orig="NewYork")
        b = make_event(event_id="b", span=(0, 7))
        assert [e.event_id for e in order_events([a, b])] == ["b", "a"]

    def test_tie_break_is_lexicographic(self):
        a2 = make_event(event_id="a2", span=(5, 5), orig="", new="x", edit_type="insert")
        a10 = make_event(event_id="a10", span=(5, 5), orig="", new="y", edit_type="insert")
        assert [e.event_id for e in order_events([a2, a10])] == ["a10", "a2"]

    def test_single_event_identity(self, madifon_event):
        assert order_events([madifon_event]) == [madifon_event]

    def test_duplicate_id_raises(self, madifon_event):
        with pytest.raises(DuplicateEventIdError):
            order_events([madifon_event, madifon_event])

    def test_permutation_invariant(self):
        rng = random.Random(3)
        events = [make_event(event_id=f"e{i}", span=(i, i + 1), orig="x") for i in range(8)]
        doc_order = order_events(list(events))
        for _ in range(10):
            shuffled = list(events)
            rng.shuffle(shuffled)
            assert order_events(shuffled) == doc_order


class TestResolveConflicts:
    def overlapping(self, **a_kw):
        a = make_event(event_id="a", span=(0, 7), **a_kw)
        return a

    def test_human_beats_confident_model(self):
        human = make_event(event_id="h", source="human", confidence=None, review_status="unreviewed")
        model = make_event(event_id="m", span=(3, 9), orig="ifon w", source="model", confidence=0.99)
        winner, losers = resolve_conflicts([human, model])
        assert winner.event_id == "h"
        assert losers[0].outcome == "conflict_lost" and losers[0].lost_to == "h"

    def test_approved_beats_unreviewed(self):
        approved = make_event(event_id="x", confidence=0.6, review_status="approved")
        unreviewed = make_event(event_id="y", span=(3, 9), orig="ifon w", confidence=0.9,
                                review_status="unreviewed")
        winner, _ = resolve_conflicts([approved, unreviewed])
        assert winner.event_id == "x"

    def test_event_id_final_tie_break(self):
        e1 = make_event(event_id="e1", source="rule", confidence=0.8, review_status=None)
        e2 = make_event(event_id="e2", span=(3, 9), orig="ifon w", source="rule", confidence=0.8,
                        review_status=None)
        winner, _ = resolve_conflicts([e1, e2])
        assert winner.event_id == "e1"

    def test_error_mode_lists_group(self):
        a = make_event(event_id="a")
        b = make_event(event_id="b", span=(3, 9), orig="ifon w")
        with pytest.raises(ConflictError) as excinfo:
            resolve_conflicts([a, b], mode="error")
        assert ("a", "b") in excinfo.value.groups or ("b", "a") in excinfo.value.groups

    def test_skip_group_marks_all(self):
        a = make_event(event_id="a")
        b = make_event(event_id="b", span=(3, 9), orig="ifon w")
        winner, entries = resolve_conflicts([a, b], mode="skip_group")
        assert winner is None
        assert {e.outcome for e in entries} == {"conflict_error"}
        assert {e.event_id for e in entries} == {"a", "b"}


class TestApplyEvents:
    def test_two_event_example(self, base_doc, madifon_event, split_event):
        text, _ = apply_events(base_doc, order_events([madifon_event, split_event]))
        assert text == "Madison went to New York."

    def test_empty_event_list_is_noop(self, base_doc):
        text, offset_map = apply_events(base_doc, [])
        assert text == base_doc.text
        assert offset_map.to_variant((3, 9)) == (3, 9)

    def test_hyphenation_repair(self):
        doc = BaseDocument(doc_id="d1", page_id=1, text="inter-\nnational")
        event = make_event(span=(0, 15), orig="inter-\nnational", new="international",
                           edit_type="normalize")
        text, _ = apply_events(doc, [event])
        assert text == "international"

    def test_integrity_checked_at_apply_time(self, base_doc):
        stale = make_event(orig="Stale!!", span=(0, 7))
        with pytest.raises(ApplyIntegrityError) as excinfo:
            apply_events(base_doc, [stale])
        assert "e1" in str(excinfo.value)

    def test_matches_right_to_left_oracle_randomized(self):
        rng = random.Random(1234)
        for _ in range(500):
            doc = BaseDocument(doc_id="d1", page_id=1, text=random_base_text(rng))
            events = random_nonoverlapping_events(rng, doc)
            ordered = order_events(events)
            text, _ = apply_events(doc, ordered)
            assert text == oracle_apply_right_to_left(doc.text, events)


class TestReconstruct:
    def test_all_corrections_applies_everything(self, base_doc, madifon_event, split_event):
        variant = reconstruct(base_doc, [madifon_event, split_event], POLICY_PRESETS["all"])
        assert variant.text == "Madison went to New York."
        assert set(variant.trace.applied_ids) == {"e1", "e2"}

    def test_threshold_085_applies_only_high_confidence(self, base_doc, madifon_event, split_event):
        variant = reconstruct(base_doc, [madifon_event, split_event], POLICY_PRESETS["conf85"])
        assert variant.trace.applied_ids == ["e2"]
        assert variant.text == "Madifon went to New York."

    def test_raw_variant_equals_base(self, base_doc, madifon_event, split_event):
        variant = reconstruct(base_doc, [madifon_event, split_event], POLICY_PRESETS["raw"])
        assert variant.text == base_doc.text

    def test_trace_totality(self, base_doc):
        events = [
            make_event(event_id="applied", confidence=0.9),
            make_event(event_id="low", span=(8, 12), orig="went", confidence=0.1),
            make_event(event_id="vetoed", span=(13, 15), orig="to", review_status="rejected"),
        ]
        variant = reconstruct(base_doc, events, POLICY_PRESETS["conf70"], conflict_mode="resolve")
        outcomes = {e.event_id: e.outcome for e in variant.trace.entries}
        assert outcomes == {
            "applied": "applied",
            "low": "skipped_policy",
            "vetoed": "excluded_rejected",
        }
        assert len(variant.trace.entries) == len(events)

    def test_conflict_default_mode_raises(self, base_doc):
        a = make_event(event_id="a")
        b = make_event(event_id="b", span=(3, 9), orig="ifon w")
        with pytest.raises(ConflictError):
            reconstruct(base_doc, [a, b], POLICY_PRESETS["all"])

    def test_conflict_resolve_mode_traces_loser(self, base_doc):
        a = make_event(event_id="a", source="human", confidence=None)
        b = make_event(event_id="b", span=(3, 9), orig="ifon w", source="model", confidence=0.99)
        variant = reconstruct(base_doc, [a, b], POLICY_PRESETS["all"], conflict_mode="resolve")
        outcomes = {e.event_id: (e.outcome, e.lost_to) for e in variant.trace.entries}
        assert outcomes["a"] == ("applied", None)
        assert outcomes["b"] == ("conflict_lost", "a")

    def test_permutation_invariance(self, base_doc):
        rng = random.Random(77)
        events = [
            make_event(event_id="applied", confidence=0.9),
            make_event(event_id="low", span=(8, 12), orig="went", confidence=0.1),
            make_event(event_id="s", span=(16, 23), orig="NewYork", new="New York",
                       edit_type="split", confidence=0.8),
        ]
        reference = reconstruct(base_doc, events, POLICY_PRESETS["conf70"], "resolve")
        for _ in range(5):
            shuffled = list(events)
            rng.shuffle(shuffled)
            variant = reconstruct(base_doc, shuffled, POLICY_PRESETS["conf70"], "resolve")
            assert variant.text == reference.text
            assert variant.variant_id == reference.variant_id
            assert variant.trace == reference.trace

    def test_policy_monotonicity_of_selected_sets(self, base_doc):
        rng = random.Random(5)
        events = random_nonoverlapping_events(rng, base_doc, max_events=10)
        ladder = [0.5, 0.7, 0.85]
        selections = []
        for tau in ladder:
            selected, _ = select_events(events, TrustPolicy(name=f"t{tau}", min_confidence=tau))
            selections.append({e.event_id for e in selected})
        assert selections[2] <= selections[1] <= selections[0]

    def test_variant_id_distinguishes_policies(self, base_doc, madifon_event):
        v1 = reconstruct(base_doc, [madifon_event], POLICY_PRESETS["all"])
        v2 = reconstruct(base_doc, [madifon_event], POLICY_PRESETS["raw"])
        assert v1.variant_id != v2.variant_id


class TestParsePolicy:
    def test_presets(self):
        assert parse_policy("conf70").min_confidence == 0.70
        assert parse_policy("approved").require_approved

    def test_shorthand(self):
        assert parse_policy("conf>=0.42").min_confidence == 0.42

    def test_inline_json(self):
        policy = parse_policy('{"name": "custom", "allowed_sources": ["human"]}')
        assert policy.allowed_sources == frozenset({"human"})

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            parse_policy("bogus")
