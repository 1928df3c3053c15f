import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compass import (
    CompetenceLabel,
    CompetenceMemory,
    FeedbackSource,
    Verdict,
    assess,
    incorporate_feedback,
    p_known,
)
from compass.errors import DimensionMismatch, InvalidThreshold

from conftest import calibration_for, make_descriptor, memory_of


class TestPKnown:
    def test_empty_memory_is_zero(self, unit_calibration):
        assert p_known(make_descriptor([42.0]), CompetenceMemory(), unit_calibration) == 0.0

    def test_exact_match_is_one(self, unit_calibration):
        memory = memory_of(1, ([3.0], "competent"))
        assert p_known(make_descriptor([3.0]), memory, unit_calibration) == 1.0

    def test_entry_at_kernel_width_distance(self):
        width = 1.543
        calib = calibration_for(1, width=width)
        memory = memory_of(1, ([0.0], "competent"))
        p = p_known(make_descriptor([width]), memory, calib)
        assert p == pytest.approx(math.exp(-1), abs=1e-12)

    def test_uses_nearest_entry(self, unit_calibration):
        memory = memory_of(1, ([0.0], "competent"), ([10.0], "incompetent"))
        p = p_known(make_descriptor([0.5]), memory, unit_calibration)
        assert p == pytest.approx(math.exp(-0.25), abs=1e-12)

    def test_dimension_mismatch_against_calibration(self, unit_calibration):
        with pytest.raises(DimensionMismatch):
            p_known(make_descriptor([0.0, 1.0]), CompetenceMemory(), unit_calibration)

    def test_dimension_mismatch_against_memory(self):
        calib = calibration_for(2)
        memory = memory_of(1, ([0.0], "competent"))
        with pytest.raises(DimensionMismatch):
            p_known(make_descriptor([0.0, 1.0]), memory, calib)


class TestAssess:
    def test_empty_memory_unknown_no_score(self, unit_calibration):
        result = assess(make_descriptor([1.0]), CompetenceMemory(), unit_calibration, 0.5)
        assert result.p_known == 0.0
        assert result.verdict is Verdict.UNKNOWN
        assert result.competence_score is None
        assert result.nearest is None

    def test_exact_competent_match_scores_plus_one(self, unit_calibration):
        memory = memory_of(1, ([2.0], "competent"))
        result = assess(make_descriptor([2.0]), memory, unit_calibration, 0.5)
        assert result.verdict is Verdict.KNOWN
        assert result.competence_score == 1.0
        assert result.nearest.sequence == 0 and result.nearest.distance == 0.0

    def test_exact_incompetent_match_scores_minus_one(self, unit_calibration):
        memory = memory_of(1, ([2.0], "incompetent"))
        result = assess(make_descriptor([2.0]), memory, unit_calibration, 0.5)
        assert result.competence_score == -1.0

    def test_incompetent_entry_at_half_width(self):
        width = 1.543
        calib = calibration_for(1, width=width)
        memory = memory_of(1, ([0.0], "incompetent"))
        result = assess(make_descriptor([0.5 * width]), memory, calib, 0.5)
        assert result.verdict is Verdict.KNOWN
        assert result.p_known == pytest.approx(math.exp(-0.25), abs=1e-12)
        assert result.competence_score == pytest.approx(-math.exp(-0.25), abs=1e-12)

    def test_below_threshold_unknown_keeps_nearest(self, unit_calibration):
        memory = memory_of(1, ([10.0], "competent"))
        result = assess(make_descriptor([0.0]), memory, unit_calibration, 0.5)
        assert result.verdict is Verdict.UNKNOWN
        assert result.competence_score is None
        assert result.nearest is not None and result.nearest.distance == 10.0

    def test_verdict_known_exactly_at_threshold(self, unit_calibration):
        # place the entry so p_known == threshold bit-for-bit
        d = 0.7
        threshold = math.exp(-(d / 1.0) ** 2)
        memory = memory_of(1, ([0.0], "competent"))
        result = assess(make_descriptor([d]), memory, unit_calibration, threshold)
        assert result.p_known == threshold
        assert result.verdict is Verdict.KNOWN

    def test_equidistant_conflict_resolves_to_lowest_sequence(self, unit_calibration):
        memory = memory_of(1, ([1.0], "incompetent"), ([-1.0], "competent"))
        result = assess(make_descriptor([0.0]), memory, unit_calibration, 0.1)
        assert result.nearest.sequence == 0
        assert result.competence_score < 0

    def test_invalid_threshold(self, unit_calibration):
        for threshold in (0.0, 1.0, -0.5, 1.5, float("nan")):
            with pytest.raises(InvalidThreshold):
                assess(make_descriptor([0.0]), CompetenceMemory(), unit_calibration, threshold)


class TestIncorporateFeedback:
    def test_first_insertion_gets_sequence_zero(self):
        memory = incorporate_feedback(
            CompetenceMemory(), make_descriptor([1.0]), CompetenceLabel.COMPETENT
        )
        assert len(memory) == 1
        assert memory.entries[0].sequence == 0
        assert memory.entries[0].source is FeedbackSource.HUMAN

    def test_append_preserves_existing_entries(self):
        memory = memory_of(1, ([0.0], "competent"), ([5.0], "incompetent"))
        grown = incorporate_feedback(memory, make_descriptor([9.0]), CompetenceLabel.COMPETENT)
        assert grown.entries[:2] == memory.entries
        assert grown.entries[2].sequence == 2
        assert len(memory) == 2  # original untouched

    def test_duplicate_insertions_are_harmless(self, unit_calibration):
        v = make_descriptor([4.0])
        memory = CompetenceMemory()
        for _ in range(2):
            memory = incorporate_feedback(memory, v, CompetenceLabel.COMPETENT)
        assert len(memory) == 2
        result = assess(v, memory, unit_calibration, 0.5)
        assert result.competence_score == 1.0

    def test_just_labeled_query_is_fully_known(self, unit_calibration):
        q = make_descriptor([1.25])
        memory = incorporate_feedback(CompetenceMemory(), q, CompetenceLabel.INCOMPETENT)
        assert p_known(q, memory, unit_calibration) == 1.0

    def test_dimension_fixed_by_first_insertion(self):
        memory = memory_of(2, ([0.0, 1.0], "competent"))
        with pytest.raises(DimensionMismatch):
            incorporate_feedback(memory, make_descriptor([0.0]), CompetenceLabel.COMPETENT)


class TestProperties:
    @settings(deadline=None, max_examples=60)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_monotone_knowledge(self, seed):
        rng = random.Random(seed)
        dim = rng.randint(1, 4)
        calib = calibration_for(dim, width=rng.uniform(0.5, 3.0))
        memory = CompetenceMemory()
        for i in range(rng.randint(0, 6)):
            memory = incorporate_feedback(
                memory,
                make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id=f"m{i}"),
                rng.choice(list(CompetenceLabel)),
            )
        query = make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id="q")
        before = p_known(query, memory, calib)
        grown = incorporate_feedback(
            memory,
            make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id="new"),
            CompetenceLabel.COMPETENT,
        )
        assert p_known(query, grown, calib) >= before

    @settings(deadline=None, max_examples=60)
    @given(
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=1e-6, max_value=0.04),
    )
    def test_threshold_boundary(self, threshold, margin):
        # entries placed so p_known straddles the threshold by +/- margin
        calib = calibration_for(1)
        for p, expected in (
            (threshold - margin, Verdict.UNKNOWN),
            (threshold, Verdict.KNOWN),
            (min(threshold + margin, 1.0), Verdict.KNOWN),
        ):
            d = math.sqrt(-math.log(p))
            memory = memory_of(1, ([0.0], "competent"))
            result = assess(make_descriptor([d]), memory, calib, threshold)
            if result.p_known == threshold:
                assert result.verdict is Verdict.KNOWN
            else:
                assert result.verdict is (
                    Verdict.KNOWN if result.p_known > threshold else Verdict.UNKNOWN
                )
                assert result.verdict is expected or abs(result.p_known - threshold) < 1e-12

    @settings(deadline=None, max_examples=40)
    @given(
        st.integers(min_value=0, max_value=2**31),
        st.floats(min_value=0.1, max_value=0.9),
    )
    def test_generalization_within_kernel_horizon(self, seed, threshold):
        # one labeled cluster point makes every query inside the
        # kernel(d) >= threshold shell Known
        rng = random.Random(seed)
        dim = rng.randint(1, 4)
        calib = calibration_for(dim, width=rng.uniform(0.5, 3.0))
        center = make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id="center")
        memory = incorporate_feedback(CompetenceMemory(), center, CompetenceLabel.COMPETENT)
        horizon = calib.kernel_width * math.sqrt(-math.log(threshold))
        direction = [rng.gauss(0, 1) for _ in range(dim)]
        norm = math.sqrt(sum(x * x for x in direction)) or 1.0
        d = rng.uniform(0, horizon * 0.999)
        query = make_descriptor(
            [c + d * x / norm for c, x in zip(center.vector, direction)], id="q"
        )
        result = assess(query, memory, calib, threshold)
        assert result.p_known >= threshold
        assert result.verdict is Verdict.KNOWN

    @settings(deadline=None, max_examples=60)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_signed_score_follows_nearest_label(self, seed):
        rng = random.Random(seed)
        dim = rng.randint(1, 3)
        calib = calibration_for(dim, width=rng.uniform(0.5, 2.0))
        memory = CompetenceMemory()
        for i in range(rng.randint(1, 8)):
            memory = incorporate_feedback(
                memory,
                make_descriptor([rng.uniform(-3, 3) for _ in range(dim)], id=f"m{i}"),
                rng.choice(list(CompetenceLabel)),
            )
        query = make_descriptor([rng.uniform(-3, 3) for _ in range(dim)], id="q")
        result = assess(query, memory, calib, 1e-9 + 1e-12)
        if result.verdict is Verdict.KNOWN:
            nearest = min(
                memory.entries,
                key=lambda e: (math.dist(query.vector, e.descriptor.vector), e.sequence),
            )
            assert math.copysign(1, result.competence_score) == nearest.label.sign
            assert abs(result.competence_score) == result.p_known
