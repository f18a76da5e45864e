"""Tests for rationals, type labels and instance validation."""

from fractions import Fraction

import pytest

from auctionlab import (
    Interest,
    NULL_TYPE,
    TypeLabel,
    make_bidder,
    make_instance,
    parse_rational,
    render_rational,
    reverse_mass,
)
from auctionlab.errors import (
    NegativeProbabilityError,
    ProbabilitySumError,
    RationalFormatError,
    ShapeError,
    TypeIndexError,
    ValueOrderError,
)


class TestRationals:
    def test_parse_fraction_text(self):
        assert parse_rational("6/4") == Fraction(3, 2)
        assert parse_rational(" -7/21 ") == Fraction(-1, 3)

    def test_parse_integer_forms(self):
        assert parse_rational("5") == 5
        assert parse_rational(5) == 5
        assert parse_rational(Fraction(1, 9)) == Fraction(1, 9)

    @pytest.mark.parametrize("text", ["", "1/0", "a/b", "1.5", "1//2"])
    def test_parse_rejects_malformed(self, text):
        with pytest.raises(RationalFormatError):
            parse_rational(text)

    def test_parse_rejects_floats(self):
        """Floats never enter exact arithmetic."""
        with pytest.raises(RationalFormatError):
            parse_rational(0.5)

    def test_render_lowest_terms(self):
        assert render_rational(Fraction(10, 4)) == "5/2"
        assert render_rational(3) == "3/1"
        assert render_rational("-2/6") == "-1/3"


class TestTypeLabel:
    def test_flat_index_order(self):
        assert NULL_TYPE.flat == 0
        assert TypeLabel(1, Interest.DAY1).flat == 1
        assert TypeLabel(1, Interest.DAY2).flat == 2
        assert TypeLabel(3, Interest.DAY2).flat == 6

    def test_from_flat_inverts_flat(self):
        for index in range(0, 12):
            assert TypeLabel.from_flat(index).flat == index

    def test_negative_flat_rejected(self):
        with pytest.raises(TypeIndexError):
            TypeLabel.from_flat(-1)

    def test_str(self):
        assert str(NULL_TYPE) == "t0"
        assert str(TypeLabel(3, Interest.DAY2)) == "(v3,2)"

    def test_labels_skip_null(self):
        bidder = make_bidder([1, 2], ["1/4", "1/4"], ["1/4", "1/4"])
        labels = list(bidder.labels())
        assert len(labels) == 4
        assert NULL_TYPE not in labels
        assert bidder.type_count == 5


class TestBidderSpec:
    @pytest.fixture
    def bidder(self):
        return make_bidder([2, 4, 7], ["1/8", "1/8", "1/4"], ["1/4", "1/8", "1/8"])

    def test_values_and_masses(self, bidder):
        assert bidder.value(0) == 0
        assert bidder.value(3) == 7
        assert bidder.f(2, Interest.DAY2) == Fraction(1, 8)
        assert bidder.f(0, Interest.DAY1) == 0
        assert bidder.mass_at(TypeLabel(3, Interest.DAY1).flat) == Fraction(1, 4)
        assert bidder.value_at(TypeLabel(2, Interest.DAY2).flat) == 4

    def test_tails(self, bidder):
        assert bidder.tail(1, Interest.DAY1) == Fraction(1, 2)
        assert bidder.tail(2, Interest.DAY2) == Fraction(1, 4)
        assert bidder.tail(4, Interest.DAY1) == 0

    def test_tail_out_of_range(self, bidder):
        with pytest.raises(TypeIndexError):
            bidder.tail(5, Interest.DAY1)

    def test_level_out_of_range(self, bidder):
        with pytest.raises(TypeIndexError):
            bidder.value(4)

    def test_reverse_mass(self, bidder):
        inst = make_instance(bidder, bidder)
        assert reverse_mass(inst, 2, 3, Interest.DAY2) == Fraction(1, 8)


class TestInstanceValidation:
    def test_valid_instance(self, two_level_instance):
        assert two_level_instance.shared_grid
        assert two_level_instance.bidder(2).n == 2

    def test_probabilities_must_sum_to_one(self):
        bad = make_bidder([1, 2], ["1/4", "1/4"], ["1/4", "1/8"])
        with pytest.raises(ProbabilitySumError) as exc_info:
            make_instance(bad, bad)
        assert exc_info.value.context["bidder"] == 1

    def test_negative_probability(self):
        bad = make_bidder([1, 2], ["3/4", "-1/4"], ["1/4", "1/4"])
        with pytest.raises(NegativeProbabilityError):
            make_instance(make_bidder([1], [1], [0]), bad)

    def test_values_strictly_increasing(self):
        bad = make_bidder([2, 2], ["1/2", "1/2"], [0, 0])
        with pytest.raises(ValueOrderError):
            make_instance(bad, bad)

    def test_table_shapes(self):
        bad = make_bidder([1, 2], ["1/2", "1/2"], [0])
        with pytest.raises(ShapeError):
            make_instance(bad, bad)

    def test_bidder_index(self, two_level_instance):
        with pytest.raises(TypeIndexError):
            two_level_instance.bidder(3)
