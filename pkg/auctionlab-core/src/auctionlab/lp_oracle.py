"""Revenue-maximization LP over ex-post allocations and interim payments.

Interim allocations are substituted out as expectations over the opponent's
type, and null-type rows and columns are left out entirely (their allocation
and payment are zero), so the program only carries ``X_i(t1, t2)`` for
non-null profiles and ``p_i(t)`` for non-null types.

A bidder with no day-2 mass also loses its day-2 types: an optimal auction
can hand each of them the day-1 menu entry at the same value, so they carry
neither objective weight nor binding rows.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Mapping, Optional
import logging

from .errors import BackendUnavailableError
from .mechanisms import (
    Mechanism,
    certified_auction,
    mechanism_from_rule,
    optimal_rule,
    outcome_support,
    support_of,
)
from .numerics import NULL_TYPE, BidderSpec, Instance, Interest, TypeLabel
from .simplex import LinearProgram, LPSolution, presolve, solve_exact

logger = logging.getLogger(__name__)

LP_SIZE_CAP = 20
ZERO = Fraction(0)

Backend = Literal["lp", "flow"]
ConstraintSet = Literal["full", "local"]


def x_var(i: int, t1: int, t2: int) -> str:
    return f"X{i}[{t1},{t2}]"


def p_var(i: int, t: int) -> str:
    return f"p{i}[{t}]"


def _own_and_other(i: int, own: int, other: int) -> tuple[int, int]:
    return (own, other) if i == 1 else (other, own)


def lp_labels(spec: BidderSpec) -> list[TypeLabel]:
    """Non-null types the LP carries for one bidder."""
    if spec.tail(1, Interest.DAY2):
        return list(spec.labels())
    return [t for t in spec.labels() if t.interest == Interest.DAY1]


def _carried(spec: BidderSpec, t: TypeLabel) -> TypeLabel:
    """The LP type whose allocation and payment ``t`` copies."""
    if t.is_null or spec.tail(1, Interest.DAY2):
        return t
    return TypeLabel(t.k, Interest.DAY1)


def _interim_expr(inst: Instance, i: int, t: TypeLabel) -> dict[str, Fraction]:
    """``pi_i(t)`` as a linear form in the X variables."""
    if t.is_null:
        return {}
    opponent = inst.opponent(i)
    expr = {}
    for label in lp_labels(opponent):
        mass = opponent.f(label.k, label.interest)
        if mass:
            t1, t2 = _own_and_other(i, t.flat, label.flat)
            expr[x_var(i, t1, t2)] = mass
    return expr


def _deviations(reports: list[TypeLabel], constraints: ConstraintSet):
    """``(true, lie)`` pairs whose BIC rows enter the program.

    ``full`` keeps every misreport that does not claim a later day than the
    true interest; ``local`` keeps only the edges a flow can carry: one level
    down within the same interest (the null type below level 1) and day 2 to
    day 1 at the same level.
    """
    present = set(reports)
    for true in reports:
        if constraints == "local":
            if true.is_null:
                continue
            below = TypeLabel(true.k - 1, true.interest) if true.k > 1 else NULL_TYPE
            if below in present:
                yield true, below
            if true.interest == Interest.DAY2:
                yield true, TypeLabel(true.k, Interest.DAY1)
            continue
        for lie in reports:
            if lie == true:
                continue
            if true.is_null or lie.is_null or lie.interest <= true.interest:
                yield true, lie


def assemble_lp(
    inst: Instance,
    constraints: ConstraintSet = "full",
    pins: Optional[Mapping[str, Fraction]] = None,
) -> LinearProgram:
    """Variables, feasibility rows and BIC rows (deviations to t0 included).

    Args:
        inst: Instance to optimize over.
        constraints: ``full`` for every BIC row, ``local`` for the flow edges only.
        pins: Variable values added as equality rows.

    Returns:
        The program before presolve.
    """
    if constraints not in ("full", "local"):
        raise BackendUnavailableError(
            f"Unknown constraint set {constraints!r}", {"constraints": constraints}
        )
    for i in (1, 2):
        if inst.bidder(i).n > LP_SIZE_CAP:
            logger.warning(
                "bidder %d has %d value levels, above the LP size cap of %d",
                i, inst.bidder(i).n, LP_SIZE_CAP,
            )
    types1, types2 = lp_labels(inst.bidder1), lp_labels(inst.bidder2)
    lp = LinearProgram()
    for t1 in types1:
        for t2 in types2:
            lp.add_variable(x_var(1, t1.flat, t2.flat))
            lp.add_variable(x_var(2, t1.flat, t2.flat))
    for i, types in ((1, types1), (2, types2)):
        spec = inst.bidder(i)
        for t in types:
            lp.add_variable(p_var(i, t.flat), spec.f(t.k, t.interest), free=True)

    for t1 in types1:
        for t2 in types2:
            lp.add_constraint(
                {x_var(1, t1.flat, t2.flat): 1, x_var(2, t1.flat, t2.flat): 1},
                "<=",
                1,
                name=f"feasible {t1} {t2}",
            )

    for i, types in ((1, types1), (2, types2)):
        spec = inst.bidder(i)
        for true, lie in _deviations([NULL_TYPE, *types], constraints):
            value = spec.value(true.k)
            row: dict[str, Fraction] = {}
            for var, coef in _interim_expr(inst, i, lie).items():
                row[var] = row.get(var, ZERO) + coef * value
            for var, coef in _interim_expr(inst, i, true).items():
                row[var] = row.get(var, ZERO) - coef * value
            if not lie.is_null:
                row[p_var(i, lie.flat)] = Fraction(-1)
            if not true.is_null:
                row[p_var(i, true.flat)] = row.get(p_var(i, true.flat), ZERO) + 1
            if any(row.values()):
                lp.add_constraint(row, "<=", 0, name=f"bic{i} {true}->{lie}")

    for var, value in (pins or {}).items():
        lp.add_constraint({var: 1}, "=", value, name=f"pin {var}")
    logger.info(
        "assembled %s LP with %d variables and %d constraints",
        constraints, len(lp.variables), len(lp.constraints),
    )
    return lp


@dataclass(frozen=True)
class OptimalAuction:
    value: Fraction
    solution: LPSolution
    mechanism: Mechanism
    program: LinearProgram


def lp_mechanism(inst: Instance, solution: LPSolution) -> Mechanism:
    """Mechanism read off a solved LP; ex-post payments are the interim ones.

    Types the LP left out copy their day-1 counterpart.
    """
    values = solution.assignment
    b1, b2 = inst.bidder1, inst.bidder2

    def rule(t1: TypeLabel, t2: TypeLabel):
        if t1.is_null or t2.is_null:
            return ZERO, ZERO
        s1, s2 = _carried(b1, t1), _carried(b2, t2)
        return (
            values.get(x_var(1, s1.flat, s2.flat), ZERO),
            values.get(x_var(2, s1.flat, s2.flat), ZERO),
        )

    payments = []
    for i in (1, 2):
        spec = inst.bidder(i)
        row = [ZERO] * spec.type_count
        for t in spec.labels():
            row[t.flat] = values.get(p_var(i, _carried(spec, t).flat), ZERO)
        payments.append(row)
    return mechanism_from_rule(inst, "lp", rule, payments=payments)


def solve_instance(
    inst: Instance,
    constraints: ConstraintSet = "full",
    pins: Optional[Mapping[str, Fraction]] = None,
) -> OptimalAuction:
    """Assemble, presolve and solve the revenue LP exactly.

    Args:
        inst: Instance to optimize over.
        constraints: ``full`` or ``local`` BIC rows. When a flow certificate
            exists for ``inst`` both give the same optimum, since the local
            rows are exactly those the certificate's Lagrangian prices.
        pins: Optional fixed variable values, e.g. ``{x_var(1, 1, 1): 1}``.

    Returns:
        Optimal revenue, raw solution, the mechanism read off it and the
        assembled program.

    Raises:
        InfeasibleError: If the pins cannot be met.
    """
    program = assemble_lp(inst, constraints, pins)
    solution = solve_exact(presolve(program))
    return OptimalAuction(solution.value, solution, lp_mechanism(inst, solution), program)


def select_outcome(
    inst: Instance,
    t1: TypeLabel,
    t2: TypeLabel,
    backend: Backend = "flow",
    certify: bool = False,
    solved: Optional[OptimalAuction] = None,
) -> frozenset[Optional[int]]:
    """Outcomes (1, 2 or None) a revenue-optimal auction selects at ``(t1, t2)``.

    The flow backend evaluates the certified auction's rule at the one
    profile; with ``certify`` it tabulates the mechanism and runs the
    witness check first.
    """
    if t1.is_null and t2.is_null:
        return frozenset({None})
    if backend == "lp":
        solved = solved or solve_instance(inst)
        return outcome_support(solved.mechanism, t1, t2)
    if backend != "flow":
        raise BackendUnavailableError(f"Unknown backend {backend!r}", {"backend": backend})
    if not inst.shared_grid:
        raise BackendUnavailableError(
            "Flow backend needs a reduction instance", {"backend": backend}
        )
    if certify:
        certified = certified_auction(inst)
        if not certified.report.passed:
            raise BackendUnavailableError(
                "No witnessed auction for this instance",
                {"failures": len(certified.report.failures)},
            )
        return outcome_support(certified.mechanism, t1, t2)
    _, rule = optimal_rule(inst)
    return support_of(*rule(t1, t2))
