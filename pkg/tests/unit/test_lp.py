"""Tests for the exact simplex and the revenue LP."""

from fractions import Fraction

import pytest

from auctionlab import (
    DisjInput,
    LinearProgram,
    assemble_lp,
    bic_violations,
    build_instance,
    certified_auction,
    dump_lp,
    interim_form,
    revenue,
    select_outcome,
    solve_exact,
    solve_instance,
)
from auctionlab.errors import BackendUnavailableError, InfeasibleError, LPError, UnboundedError
from auctionlab.lp_oracle import x_var
from auctionlab.myerson import fedex_embedding, make_distribution, myerson_revenue, point_mass
from auctionlab.numerics import Interest, TypeLabel
from auctionlab.protocol import LOWEST
from auctionlab.simplex import presolve


def _two_variable_lp() -> LinearProgram:
    lp = LinearProgram()
    lp.add_variable("x", 1)
    lp.add_variable("y", 1)
    lp.add_constraint({"x": 1, "y": 2}, "<=", 4, name="first")
    lp.add_constraint({"x": 3, "y": 1}, "<=", 6, name="second")
    return lp


class TestSimplex:
    def test_optimum(self):
        solution = solve_exact(_two_variable_lp())
        assert solution.value == Fraction(14, 5)
        assert solution.assignment == {"x": Fraction(8, 5), "y": Fraction(6, 5)}

    def test_equality_and_free_variables(self):
        lp = LinearProgram()
        lp.add_variable("x", -1)
        lp.add_variable("z", 1, free=True)
        lp.add_constraint({"x": 1, "z": 1}, "=", 3)
        lp.add_constraint({"z": 1}, "<=", -2)
        solution = solve_exact(lp)
        assert solution.assignment["z"] == -2
        assert solution.assignment["x"] == 5
        assert solution.value == -7

    def test_infeasible(self):
        lp = LinearProgram()
        lp.add_variable("x", 1)
        lp.add_constraint({"x": 1}, "<=", -1)
        with pytest.raises(InfeasibleError):
            solve_exact(lp)

    def test_unbounded(self):
        lp = LinearProgram()
        lp.add_variable("x", 1)
        lp.add_variable("y")
        lp.add_constraint({"x": -1, "y": 1}, "<=", 1)
        with pytest.raises(UnboundedError):
            solve_exact(lp)

    def test_duplicate_and_unknown_variables(self):
        lp = LinearProgram()
        lp.add_variable("x")
        with pytest.raises(LPError):
            lp.add_variable("x")
        with pytest.raises(LPError):
            lp.add_constraint({"w": 1}, "<=", 1)

    def test_presolve_fixes_idle_columns(self):
        lp = _two_variable_lp()
        lp.add_variable("idle")
        lp.add_constraint({"idle": 1}, "<=", 1)
        reduced = presolve(lp)
        assert reduced.fixed == {"idle": 0}
        assert "idle" not in reduced.variables
        assert solve_exact(reduced).value == Fraction(14, 5)

    def test_dump(self):
        text = dump_lp(_two_variable_lp())
        assert text.startswith("max: 1/1 x + 1/1 y\n")
        assert "second: 3/1 x + 1/1 y <= 6/1" in text


class TestRevenueLP:
    def test_variable_count(self, small_instance):
        inst, _ = small_instance
        lp = assemble_lp(inst)
        # Bidder Two has no day-2 mass, so only its four day-1 types enter.
        assert sum(1 for v in lp.variables if v.startswith("X")) == 64
        assert x_var(1, 1, 2) not in lp.variables
        assert x_var(1, 2, 1) in lp.variables

    def test_local_program_shape(self, small_instance):
        inst, _ = small_instance
        lp = assemble_lp(inst, constraints="local")
        assert len(lp.variables) == 64 + 12
        # 32 feasibility rows, three flow edges per level for Bidder One, one for Bidder Two.
        assert len(lp.constraints) == 32 + 12 + 4
        assert all(c.name.startswith(("feasible", "bic")) for c in lp.constraints)

    def test_unknown_constraint_set(self, small_instance):
        inst, _ = small_instance
        with pytest.raises(BackendUnavailableError):
            assemble_lp(inst, constraints="sparse")

    def test_local_is_a_relaxation(self, small_instance):
        inst, _ = small_instance
        full = solve_instance(inst)
        local = solve_instance(inst, constraints="local")
        assert local.value >= full.value

    def test_dropped_types_copy_day1_menu(self, small_instance):
        inst, _ = small_instance
        solved = solve_instance(inst)
        assert bic_violations(inst, interim_form(inst, solved.mechanism)).passed
        assert revenue(inst, solved.mechanism) == solved.value
        for k in range(1, inst.bidder2.n + 1):
            day1, day2 = TypeLabel(k, Interest.DAY1), TypeLabel(k, Interest.DAY2)
            assert solved.mechanism.pay(2, 0, day2.flat) == solved.mechanism.pay(2, 0, day1.flat)

    def test_matches_myerson_on_uniform_bidders(self):
        uniform = make_distribution([5, 6], ["1/2", "1/2"])
        inst = fedex_embedding(uniform, uniform)
        solved = solve_instance(inst)
        assert solved.value == Fraction(11, 2)
        assert solved.value == myerson_revenue([uniform, uniform])
        assert solve_instance(inst, constraints="local").value == Fraction(11, 2)

    def test_matches_myerson_with_ironing(self):
        skewed = make_distribution([1, 2, 3], ["1/2", "1/10", "2/5"])
        solved = solve_instance(fedex_embedding(skewed, point_mass(2)))
        assert solved.value == myerson_revenue([skewed, point_mass(2)])

    def test_pins(self, two_level_instance):
        low = TypeLabel(1, Interest.DAY1).flat
        to_bidder1 = solve_instance(two_level_instance, pins={x_var(1, low, low): 1})
        assert to_bidder1.value == Fraction(11, 2)
        assert to_bidder1.mechanism.alloc(1, low, low) == 1
        # Leaving the (5, 5) profile unsold gives up its positive virtual value.
        unsold = solve_instance(
            two_level_instance, pins={x_var(1, low, low): 0, x_var(2, low, low): 0}
        )
        assert unsold.value < Fraction(11, 2)

    def test_infeasible_pins(self, two_level_instance):
        low = TypeLabel(1, Interest.DAY1).flat
        with pytest.raises(InfeasibleError):
            solve_instance(two_level_instance, pins={x_var(1, low, low): 1, x_var(2, low, low): 1})

    def test_program_is_returned(self, two_level_instance):
        solved = solve_instance(two_level_instance, constraints="local")
        assert len(solved.program.constraints) == 8


class TestLocalAgreesWithCertificate:
    """Once a flow certificate exists, the flow-edge LP reaches exactly the certified revenue."""

    @pytest.mark.slow
    @pytest.mark.parametrize("bit", [0, 1])
    def test_at_n_min(self, n_min, bit):
        inst, _ = build_instance(DisjInput((bit,) * n_min, (bit,) * n_min))
        certified = certified_auction(inst)
        assert certified.report.passed
        solved = solve_instance(inst, constraints="local")
        assert solved.value == revenue(inst, certified.mechanism)


class TestSelectOutcome:
    def test_flow_backend(self, disjoint_large, intersecting_large):
        yes, _ = build_instance(disjoint_large)
        no, _ = build_instance(intersecting_large)
        assert select_outcome(yes, LOWEST, LOWEST) == frozenset({1})
        assert select_outcome(no, LOWEST, LOWEST, certify=True) == frozenset({2})

    def test_flow_backend_needs_reduction_instance(self):
        uniform = make_distribution([5, 6], ["1/2", "1/2"])
        inst = fedex_embedding(uniform, make_distribution([1, 9], ["1/2", "1/2"]))
        with pytest.raises(BackendUnavailableError):
            select_outcome(inst, LOWEST, LOWEST)

    def test_unknown_backend(self, small_instance):
        inst, _ = small_instance
        with pytest.raises(BackendUnavailableError):
            select_outcome(inst, LOWEST, LOWEST, backend="quantum")

    def test_lp_backend_on_embedding(self):
        uniform = make_distribution([5, 6], ["1/2", "1/2"])
        inst = fedex_embedding(uniform, point_mass(1))
        assert select_outcome(inst, LOWEST, LOWEST, backend="lp") == frozenset({1})
