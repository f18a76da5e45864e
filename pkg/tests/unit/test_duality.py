"""Tests for flows, virtual values and the Lagrangian."""

from fractions import Fraction
from random import Random

import pytest

from auctionlab import (
    Interest,
    boost,
    build_instance,
    canonical_flow,
    canonical_properties,
    interim_form,
    is_flow,
    lagrangian_value,
    make_bidder,
    make_instance,
    modified_flow,
    modified_properties,
    revenue,
    spa_bidder1,
    spa_careful,
    virtual_values,
)
from auctionlab.duality import equal_level_gaps, lagrangian_long_form, make_flow, require_flow
from auctionlab.errors import BoostTooLargeError, FlowInvalidError, ShapeError
from auctionlab.mechanisms import InterimForm
from auctionlab.numerics import TypeLabel

from ..conftest import LARGE_N


class TestCanonicalFlow:
    def test_is_flow(self, small_instance):
        inst, _ = small_instance
        report = is_flow(inst, canonical_flow(inst))
        assert report.passed, str(report)

    def test_multipliers_are_tails(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        assert fl.bidder(1).alpha == (0, 0, 0, 0)
        assert fl.bidder(1).lam(Interest.DAY1, 2) == Fraction(608, 1280)
        assert fl.bidder(1).lam(Interest.DAY1, 5) == 0

    def test_virtual_value_c2(self, small_instance):
        inst, _ = small_instance
        vv = virtual_values(inst, canonical_flow(inst))
        assert vv.get(1, 2, Interest.DAY1) == Fraction(827, 205)

    def test_lowest_closed_form(self, small_instance, disjoint_large):
        inst, _ = small_instance
        vv = virtual_values(inst, canonical_flow(inst))
        assert vv.get(1, 1, Interest.DAY1) == 4 - 20 + 2

        large, _ = build_instance(disjoint_large)
        vv = virtual_values(large, canonical_flow(large))
        assert vv.get(1, 1, Interest.DAY1) == LARGE_N**2 - 10 * LARGE_N + 2

    def test_top_type_keeps_its_value(self, small_instance):
        inst, _ = small_instance
        vv = virtual_values(inst, canonical_flow(inst))
        assert vv.get(1, 4, Interest.DAY1) == 8
        assert vv.get(2, 4, Interest.DAY1) == 8

    def test_zero_mass_types_have_no_virtual_value(self, small_instance):
        inst, _ = small_instance
        vv = virtual_values(inst, canonical_flow(inst))
        assert vv.get(2, 1, Interest.DAY2) is None
        assert len(vv.items(2)) == 4

    def test_separation_disjoint(self, disjoint_large):
        inst, _ = build_instance(disjoint_large)
        vv = virtual_values(inst, canonical_flow(inst))
        report = canonical_properties(inst, disjoint_large, vv)
        assert report.passed, str(report)

    def test_separation_intersecting(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        vv = virtual_values(inst, canonical_flow(inst))
        report = canonical_properties(inst, intersecting_large, vv)
        assert report.passed, str(report)
        assert report.by_condition("intersection_order")

    def test_equal_level_gaps(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        vv = virtual_values(inst, canonical_flow(inst))
        gaps = equal_level_gaps(inst, intersecting_large, vv)
        assert len(gaps["c_minus_e"]) == LARGE_N
        assert len(gaps["e_minus_d"]) == 2
        assert all(g > 0 for g in gaps["c_minus_e"] + gaps["e_minus_d"])


class TestBoost:
    def test_boost_preserves_flow(self, small_instance):
        inst, _ = small_instance
        eps = Fraction(1, 1280)
        boosted = boost(inst, canonical_flow(inst), 1, 2, eps)
        assert is_flow(inst, boosted).passed
        bf, base = boosted.bidder(1), canonical_flow(inst).bidder(1)
        assert bf.alpha_at(2) == eps
        assert bf.lam(Interest.DAY1, 1) == base.lam(Interest.DAY1, 1) + eps
        assert bf.lam(Interest.DAY2, 2) == base.lam(Interest.DAY2, 2) - eps
        assert bf.lam(Interest.DAY2, 3) == base.lam(Interest.DAY2, 3)

    def test_zero_boost_is_identity(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        assert boost(inst, fl, 1, 4, 0) == fl

    def test_boost_too_large(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        with pytest.raises(BoostTooLargeError) as exc_info:
            boost(inst, fl, 1, 4, Fraction(1))
        assert exc_info.value.context["bidder"] == 1

    def test_negative_boost(self, small_instance):
        inst, _ = small_instance
        with pytest.raises(BoostTooLargeError):
            boost(inst, canonical_flow(inst), 1, 2, Fraction(-1, 10))

    def test_boost_level_range(self, small_instance):
        inst, _ = small_instance
        with pytest.raises(BoostTooLargeError):
            boost(inst, canonical_flow(inst), 1, 5, Fraction(1, 1280))


class TestModifiedFlow:
    def test_disjoint_needs_no_boost(self, disjoint_large):
        inst, _ = build_instance(disjoint_large)
        modified = modified_flow(inst)
        assert modified.eps == 0
        assert modified.k_star is None

    def test_intersecting_boost(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        modified = modified_flow(inst)
        assert modified.eps > 0
        assert 2 <= modified.k_star <= LARGE_N + 1
        assert is_flow(inst, modified.flow).passed
        vv = virtual_values(inst, modified.flow)
        assert vv.get(1, modified.k_star, Interest.DAY2) == vv.get(2, modified.k_star, Interest.DAY1)

    def test_tie_level_is_an_intersection(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        k_star = modified_flow(inst).k_star
        assert k_star - 1 in intersecting_large.intersections

    def test_properties(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        report = modified_properties(inst, intersecting_large, modified_flow(inst))
        assert report.passed, str(report)

    def test_needs_shared_grid(self, two_level_instance):
        other = make_bidder([1, 9], ["1/2", "1/2"], [0, 0])
        with pytest.raises(ShapeError):
            modified_flow(make_instance(two_level_instance.bidder1, other))


def _random_flow(inst, rng: Random):
    """A valid flow with seeded interest multipliers; lambdas follow from balance."""
    alphas, lambda1s, lambda2s = [], [], []
    for i in (1, 2):
        spec = inst.bidder(i)
        n = spec.n
        alpha = [Fraction(0)] * n
        lam1 = [Fraction(0)] * (n + 2)
        lam2 = [Fraction(0)] * (n + 2)
        for k in range(n, 0, -1):
            available = spec.f(k, Interest.DAY2) + lam2[k + 1]
            alpha[k - 1] = available * Fraction(rng.randint(0, 4), 4)
            lam2[k] = available - alpha[k - 1]
            lam1[k] = spec.f(k, Interest.DAY1) + lam1[k + 1] + alpha[k - 1]
        alphas.append(alpha)
        lambda1s.append(lam1[1 : n + 1])
        lambda2s.append(lam2[1 : n + 1])
    return make_flow(alphas, lambda1s, lambda2s)


def _random_interim(inst, rng: Random) -> InterimForm:
    """Arbitrary interim allocations in [0, 1] and payments; the null type gets zero."""
    pi, p = [], []
    for i in (1, 2):
        count = inst.bidder(i).type_count
        pi.append((Fraction(0),) + tuple(Fraction(rng.randint(0, 8), 8) for _ in range(count - 1)))
        p.append((Fraction(0),) + tuple(Fraction(rng.randint(-20, 20), 3) for _ in range(count - 1)))
    return InterimForm(pi=tuple(pi), p=tuple(p))


class TestLagrangian:
    def test_strong_duality_disjoint(self, disjoint_large):
        inst, _ = build_instance(disjoint_large)
        fl = canonical_flow(inst)
        mechanism = spa_bidder1(inst)
        assert revenue(inst, mechanism) == lagrangian_value(inst, fl, interim_form(inst, mechanism))

    def test_long_form_agrees(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        interim = interim_form(inst, spa_bidder1(inst))
        assert lagrangian_long_form(inst, fl, interim) == lagrangian_value(inst, fl, interim)

    def test_invalid_flow_rejected(self, small_instance):
        inst, _ = small_instance
        zeros = [[0] * 4, [0] * 4]
        bad = make_flow(zeros, zeros, zeros)
        with pytest.raises(FlowInvalidError):
            require_flow(inst, bad)

    def test_flow_shape_checked(self, small_instance):
        inst, _ = small_instance
        short = [[0] * 3, [0] * 3]
        with pytest.raises(ShapeError):
            virtual_values(inst, make_flow(short, short, short))

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_long_form_matches_virtual_surplus_for_any_flow(self, small_instance, seed):
        """For a valid flow and any interim form, payment terms cancel and the
        long form collapses to the virtual surplus."""
        inst, _ = small_instance
        rng = Random(seed)
        fl = _random_flow(inst, rng)
        assert is_flow(inst, fl).passed
        interim = _random_interim(inst, rng)
        assert lagrangian_long_form(inst, fl, interim) == lagrangian_value(inst, fl, interim)

    def test_payment_coefficients_cancel(self, small_instance):
        inst, _ = small_instance
        rng = Random(11)
        fl = _random_flow(inst, rng)
        interim = _random_interim(inst, rng)
        repriced = _random_interim(inst, Random(12))
        shifted = InterimForm(pi=interim.pi, p=repriced.p)
        assert lagrangian_long_form(inst, fl, shifted) == lagrangian_long_form(inst, fl, interim)

    def test_payments_matter_off_balance(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        b1, b2 = fl.bidder(1), fl.bidder(2)
        # Extra flow leaving the lowest day-1 type of Bidder One breaks its balance.
        unbalanced = make_flow(
            [b1.alpha, b2.alpha],
            [(b1.lambda1[0] + 1,) + b1.lambda1[1:], b2.lambda1],
            [b1.lambda2, b2.lambda2],
        )
        assert not is_flow(inst, unbalanced).passed
        interim = _random_interim(inst, Random(5))
        pay1 = list(interim.p[0])
        pay1[TypeLabel(1, Interest.DAY1).flat] += 1
        bumped = InterimForm(pi=interim.pi, p=(tuple(pay1), interim.p[1]))
        assert lagrangian_long_form(inst, unbalanced, bumped) == lagrangian_long_form(inst, unbalanced, interim) - 1

    @pytest.mark.parametrize("seed", [1, 2])
    def test_boosted_flow_long_form(self, intersecting_large, seed):
        inst, _ = build_instance(intersecting_large)
        modified = modified_flow(inst)
        assert modified.eps > 0
        interim = _random_interim(inst, Random(seed))
        assert lagrangian_long_form(inst, modified.flow, interim) == lagrangian_value(inst, modified.flow, interim)

    def test_boosted_flow_prices_the_careful_auction(self, intersecting_large):
        inst, _ = build_instance(intersecting_large)
        modified = modified_flow(inst)
        mechanism = spa_careful(inst, modified.k_star)
        interim = interim_form(inst, mechanism)
        assert lagrangian_long_form(inst, modified.flow, interim) == revenue(inst, mechanism)
