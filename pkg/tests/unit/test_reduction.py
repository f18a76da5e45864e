"""Tests for the DISJ-parameterized instance construction."""

from fractions import Fraction
from random import Random

import pytest

from auctionlab import (
    DisjInput,
    Interest,
    bidder1_day1,
    bidder1_day2,
    bidder2,
    build_instance,
    helper_lemma_report,
)
from auctionlab.errors import BitsFormatError, LengthMismatchError
from auctionlab.reduction import (
    parse_bits,
    random_disj_input,
    reduction_constants,
    render_bits,
    structured_inputs,
    value_grid,
)


class TestBits:
    def test_parse_and_render(self):
        assert parse_bits("1001") == (1, 0, 0, 1)
        assert render_bits((0, 1, 1)) == "011"

    @pytest.mark.parametrize("text", ["10a1", "12", ""])
    def test_parse_rejects_non_bits(self, text):
        with pytest.raises((BitsFormatError, LengthMismatchError)):
            DisjInput.from_text(text, text)

    def test_lengths_must_match(self):
        with pytest.raises(LengthMismatchError):
            DisjInput((1, 0), (1,))

    def test_intersections_are_one_based(self):
        d = DisjInput.from_text("1101", "0111")
        assert d.intersections == [2, 4]
        assert not d.disjoint
        assert DisjInput.from_text("10", "01").disjoint

    def test_str(self):
        assert str(DisjInput.from_text("10", "01")) == "x=10 y=01"


class TestConstants:
    def test_small_constants(self):
        b, a = reduction_constants(2)
        assert b == 640
        assert a == Fraction(608, 3)

    def test_value_grid(self):
        assert value_grid(2) == (5, 6, 7, 8)
        assert value_grid(3) == (10, 11, 12, 13, 14)

    def test_n_must_be_positive(self):
        with pytest.raises(LengthMismatchError):
            reduction_constants(0)


class TestRecurrences:
    """Hand-executed recurrences at n = 2 with b = 640."""

    def test_bidder1_day1(self):
        probs, trace = bidder1_day1(2)
        assert trace.scaled_probs == (32, 205, 205, 198)
        assert trace.scale == 1280
        assert trace.z == (Fraction(608, 3), Fraction(403, 2), Fraction(198))
        assert sum(probs) == Fraction(1, 2)

    def test_bidder1_day2(self):
        _, trace = bidder1_day2(2, (1, 0))
        assert trace.scaled_probs == (32, 203, 206, 199)
        assert trace.bits == (1, 0)

    def test_bidder2(self):
        probs, trace = bidder2(2, (1, 0))
        assert trace.scaled_probs == (31, 204, 201, 204)
        assert trace.scale == 640
        assert probs[0] == Fraction(31, 640)
        assert sum(probs) == 1

    def test_bits_length_checked(self):
        with pytest.raises(LengthMismatchError):
            bidder2(3, (1, 0))

    def test_day1_tail_above_lowest(self, small_instance):
        inst, _ = small_instance
        assert inst.bidder1.tail(2, Interest.DAY1) == Fraction(19, 40)


class TestBuildInstance:
    def test_shapes(self, small_instance):
        inst, traces = small_instance
        assert inst.shared_grid
        assert inst.bidder1.values == (5, 6, 7, 8)
        assert all(p == 0 for p in inst.bidder2.day2)
        assert [t.kind for t in traces] == ["c", "d", "e"]

    def test_masses(self, disjoint_large):
        inst, _ = build_instance(disjoint_large)
        assert sum(inst.bidder1.day1) == Fraction(1, 2)
        assert sum(inst.bidder1.day2) == Fraction(1, 2)
        assert sum(inst.bidder2.day1) == 1

    def test_helper_lemmas_small(self, small_instance):
        _, traces = small_instance
        for trace in traces:
            report = helper_lemma_report(trace)
            assert report.passed, str(report)

    def test_helper_lemmas_large(self, intersecting_large):
        _, traces = build_instance(intersecting_large)
        for trace in traces:
            assert helper_lemma_report(trace).passed

    def test_lowest_bidder2_mass_is_lightest(self, disjoint_large):
        _, traces = build_instance(disjoint_large)
        e = traces.e.scaled_probs
        assert all(e[0] < s for s in e[1:])


class TestInputFamilies:
    def test_structured_inputs(self):
        cases = structured_inputs(3)
        assert len(cases) == 6
        assert cases[0].disjoint
        assert cases[1].intersections == [1, 2, 3]
        assert cases[2].disjoint
        assert [c.intersections for c in cases[3:]] == [[1], [2], [3]]

    def test_random_inputs_are_seeded(self):
        a = random_disj_input(20, Random(7))
        b = random_disj_input(20, Random(7))
        assert a == b
        assert a.n == 20
