"""Ex-post mechanisms, interim forms, BIC checking and witness certificates.

Allocation and payment tables are indexed ``[t1][t2]`` by flat type indices of
Bidder One and Bidder Two (``0`` is the null type). Ex-post payments are
constant in the opponent's type and equal the interim payment.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from random import Random
from typing import Callable, Optional, Sequence
import logging

from .certificate import CertificateReport, ReportBuilder
from .duality import (
    Flow,
    VirtualValueTable,
    canonical_flow,
    is_flow,
    modified_flow,
    virtual_values,
)
from .errors import (
    FlowInvalidError,
    InfeasibleMechanismError,
    InfeasibleTieSplitError,
    MechanismError,
    NotMonotoneError,
    ShapeError,
    TypeIndexError,
)
from .numerics import INTERESTS, NULL_TYPE, BidderSpec, Instance, Interest, TypeLabel

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

Table = tuple[tuple[Fraction, ...], ...]
Allocation = tuple[Fraction, Fraction]
AllocationRule = Callable[[TypeLabel, TypeLabel], Allocation]


@dataclass(frozen=True)
class Mechanism:
    """Ex-post allocation ``x`` and payment ``p`` tables for both bidders."""

    name: str
    x: tuple[Table, Table]
    p: tuple[Table, Table]

    def alloc(self, i: int, t1: int, t2: int) -> Fraction:
        return self.x[i - 1][t1][t2]

    def pay(self, i: int, t1: int, t2: int) -> Fraction:
        return self.p[i - 1][t1][t2]


@dataclass(frozen=True)
class InterimForm:
    """Interim allocation ``pi`` and payment ``p`` per bidder, by flat index."""

    pi: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]
    p: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]

    def pi_at(self, i: int, label: TypeLabel) -> Fraction:
        return self.pi[i - 1][label.flat]

    def p_at(self, i: int, label: TypeLabel) -> Fraction:
        return self.p[i - 1][label.flat]

    def utility(self, i: int, value: int, report: TypeLabel) -> Fraction:
        return self.pi_at(i, report) * value - self.p_at(i, report)


# ============ Construction ============


def _table(rows: int, cols: int, cell: Callable[[int, int], Fraction]) -> Table:
    return tuple(tuple(cell(a, b) for b in range(cols)) for a in range(rows))


def mechanism_from_rule(
    inst: Instance,
    name: str,
    rule: AllocationRule,
    payments: Optional[Sequence[Sequence[Fraction]]] = None,
) -> Mechanism:
    """Tabulate ``rule`` over non-null profiles and attach payments.

    Without explicit interim ``payments`` the payment identity is applied,
    which raises NotMonotoneError on a non-monotone allocation.
    """
    rows, cols = inst.bidder1.type_count, inst.bidder2.type_count
    cells: dict[tuple[int, int], Allocation] = {}
    for a in range(rows):
        for b in range(cols):
            if a == 0 and b == 0:
                continue
            x1, x2 = rule(TypeLabel.from_flat(a), TypeLabel.from_flat(b))
            cells[(a, b)] = (ZERO if a == 0 else Fraction(x1), ZERO if b == 0 else Fraction(x2))

    def alloc(i: int) -> Table:
        return _table(rows, cols, lambda a, b: cells.get((a, b), (ZERO, ZERO))[i - 1])

    x = (alloc(1), alloc(2))
    if payments is None:
        payments = payments_from_identity(inst, _interim_alloc(inst, x))
    pay1 = tuple(Fraction(v) for v in payments[0])
    pay2 = tuple(Fraction(v) for v in payments[1])
    p = (
        _table(rows, cols, lambda a, b: pay1[a]),
        _table(rows, cols, lambda a, b: pay2[b]),
    )
    return Mechanism(name=name, x=x, p=p)


def zero_mechanism(inst: Instance) -> Mechanism:
    return mechanism_from_rule(inst, "zero", lambda t1, t2: (ZERO, ZERO))


def validate_mechanism(inst: Instance, m: Mechanism) -> None:
    """Raise InfeasibleMechanismError unless ``m`` satisfies the feasibility invariants."""
    rows, cols = inst.bidder1.type_count, inst.bidder2.type_count
    for table in (*m.x, *m.p):
        if len(table) != rows or any(len(row) != cols for row in table):
            raise ShapeError(
                f"Mechanism {m.name!r} tables must be {rows}x{cols}",
                {"rows": rows, "cols": cols},
            )
    for a in range(rows):
        for b in range(cols):
            x1, x2 = m.alloc(1, a, b), m.alloc(2, a, b)
            where = {"t1": str(TypeLabel.from_flat(a)), "t2": str(TypeLabel.from_flat(b))}
            if not (0 <= x1 <= 1 and 0 <= x2 <= 1) or x1 + x2 > 1:
                raise InfeasibleMechanismError(
                    f"Infeasible allocation ({x1}, {x2}) at {where}", where
                )
            if (a == 0 and (x1 or m.pay(1, a, b))) or (b == 0 and (x2 or m.pay(2, a, b))):
                raise InfeasibleMechanismError(
                    f"Null type receives allocation or payment at {where}", where
                )


# ============ Interim forms and payments ============


def _interim_alloc(inst: Instance, x: tuple[Table, Table]) -> tuple[tuple[Fraction, ...], ...]:
    b1, b2 = inst.bidder1, inst.bidder2
    pi1 = tuple(
        sum((b2.mass_at(b) * x[0][a][b] for b in range(b2.type_count)), ZERO)
        for a in range(b1.type_count)
    )
    pi2 = tuple(
        sum((b1.mass_at(a) * x[1][a][b] for a in range(b1.type_count)), ZERO)
        for b in range(b2.type_count)
    )
    return pi1, pi2


def interim_form(inst: Instance, m: Mechanism) -> InterimForm:
    """Expectations of the ex-post rules over the opponent's distribution."""
    pi = _interim_alloc(inst, m.x)
    pay = _interim_alloc(inst, m.p)
    return InterimForm(pi=pi, p=pay)


def identity_payments(bidder: BidderSpec, pi: Sequence[Fraction], index: int = 1) -> tuple[Fraction, ...]:
    """Payment identity for one bidder's interim allocation (flat-indexed)."""
    out = [ZERO] * bidder.type_count
    for j in INTERESTS:
        previous = ZERO
        paid = ZERO
        for k in range(1, bidder.n + 1):
            current = Fraction(pi[TypeLabel(k, j).flat])
            if current < previous:
                raise NotMonotoneError(
                    f"Interim allocation of bidder {index} decreases at "
                    f"(v{k},{int(j)}): {previous} -> {current}",
                    {"bidder": index, "interest": int(j), "k": k},
                )
            paid += bidder.value(k) * (current - previous)
            out[TypeLabel(k, j).flat] = paid
            previous = current
    return tuple(out)


def payments_from_identity(inst: Instance, pi: Sequence[Sequence[Fraction]]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(identity_payments(inst.bidder(i), pi[i - 1], i) for i in (1, 2))


def _reports(spec: BidderSpec) -> list[TypeLabel]:
    return [NULL_TYPE, *spec.labels()]


def bic_violations(inst: Instance, f: InterimForm) -> CertificateReport:
    """Every constraint of the form ``u(t, t) >= u(t, t')`` with ``t'`` no more
    demanding than ``t`` in interest. Only violations are itemized."""
    report = ReportBuilder()
    for i in (1, 2):
        spec = inst.bidder(i)
        violations = 0
        for true in _reports(spec):
            value = spec.value(true.k)
            truthful = f.utility(i, value, true)
            for lie in _reports(spec):
                if lie == true:
                    continue
                if not (true.is_null or lie.is_null or lie.interest <= true.interest):
                    continue
                deviation = f.utility(i, value, lie)
                if truthful < deviation:
                    violations += 1
                    report.greater_equal("bic", f"bidder {i} {true} -> {lie}", truthful, deviation)
        if not violations:
            report.holds("bic", f"bidder {i}", True)
    return report.build()


def utility(
    inst: Instance, f: InterimForm, bidder: int, true_type: TypeLabel, reported: TypeLabel
) -> Fraction:
    """Interim utility of ``true_type`` reporting ``reported``; an item shipped
    on a slower interest than needed is worth nothing."""
    spec = inst.bidder(bidder)
    useful = true_type.is_null or reported.is_null or reported.interest <= true_type.interest
    value = spec.value(true_type.k) if useful else 0
    return f.utility(bidder, value, reported)


def revenue(inst: Instance, m: Mechanism) -> Fraction:
    f = interim_form(inst, m)
    return sum(
        (inst.bidder(i).f(t.k, t.interest) * f.p_at(i, t) for i in (1, 2) for t in inst.bidder(i).labels()),
        ZERO,
    )


# ============ Second-price auctions ============


def _value_order(inst: Instance, t1: TypeLabel, t2: TypeLabel) -> int:
    v1 = inst.bidder1.value(t1.k)
    v2 = inst.bidder2.value(t2.k)
    return (v1 > v2) - (v1 < v2)


def spa_bidder1_rule(inst: Instance) -> AllocationRule:
    def rule(t1: TypeLabel, t2: TypeLabel) -> Allocation:
        if t1.is_null:
            return ZERO, ONE
        if t2.is_null:
            return ONE, ZERO
        return (ONE, ZERO) if _value_order(inst, t1, t2) >= 0 else (ZERO, ONE)

    return rule


def tie_split(inst: Instance, k_star: int) -> Fraction:
    """Bidder Two's winning probability on a day-2 tie at ``k_star``."""
    low = inst.bidder2.f(1, Interest.DAY1)
    high = inst.bidder2.f(k_star, Interest.DAY1)
    if low >= high:
        raise InfeasibleTieSplitError(
            f"f2(e1) = {low} must be below f2(e{k_star}) = {high}",
            {"k_star": k_star, "low": low, "high": high},
        )
    return low / high


def careful_rule(inst: Instance, k_star: int) -> AllocationRule:
    if not 2 <= k_star < inst.bidder1.n:
        raise TypeIndexError(
            f"k* = {k_star} outside [2, {inst.bidder1.n - 1}]", {"k_star": k_star}
        )
    split = tie_split(inst, k_star)
    base = spa_bidder1_rule(inst)

    def rule(t1: TypeLabel, t2: TypeLabel) -> Allocation:
        if t1.is_null or t2.is_null or _value_order(inst, t1, t2) != 0:
            return base(t1, t2)
        if t1.interest == Interest.DAY1:
            return (ZERO, ONE) if t1.k == 1 else (ONE, ZERO)
        if t1.k == k_star:
            return ONE - split, split
        return ONE, ZERO

    return rule


def spa_bidder1(inst: Instance) -> Mechanism:
    """Highest value wins, ties to Bidder One, identity payments."""
    return mechanism_from_rule(inst, "spa1", spa_bidder1_rule(inst))


def spa_careful(inst: Instance, k_star: int) -> Mechanism:
    """Highest value wins with the careful tie rules at levels 1 and ``k_star``."""
    return mechanism_from_rule(inst, f"careful@{k_star}", careful_rule(inst, k_star))


# ============ Witness optimality ============


def witness_report(
    inst: Instance, fl: Flow, m: Mechanism, vv: Optional[VirtualValueTable] = None
) -> CertificateReport:
    """Complementary-slackness certificate for ``(fl, m)`` plus BIC of ``m``.

    The allocation conditions are quantified over positive-probability
    profiles; only their violations are itemized.
    """
    flow_report = is_flow(inst, fl)
    if not flow_report.passed:
        raise FlowInvalidError(
            "Witness check needs a valid flow", {"violations": len(flow_report.failures)}
        )
    vv = vv or virtual_values(inst, fl)
    f = interim_form(inst, m)
    report = ReportBuilder()

    for i in (1, 2):
        spec = inst.bidder(i)
        try:
            expected = identity_payments(spec, f.pi[i - 1], i)
        except NotMonotoneError as exc:
            report.holds("monotone", str(exc), False)
            continue
        for label in spec.labels():
            report.equal("payment_identity", f"bidder {i} {label}", f.p_at(i, label), expected[label.flat])

    for i in (1, 2):
        spec, bf = inst.bidder(i), fl.bidder(i)
        for k in range(1, spec.n + 1):
            if bf.alpha_at(k) > 0:
                value = spec.value(k)
                report.equal(
                    "alpha_indifference",
                    f"bidder {i} k={k}",
                    f.utility(i, value, TypeLabel(k, Interest.DAY2)),
                    f.utility(i, value, TypeLabel(k, Interest.DAY1)),
                )

    misallocated = 0
    for t1, phi1 in vv.items(1):
        for t2, phi2 in vv.items(2):
            x1, x2 = m.alloc(1, t1.flat, t2.flat), m.alloc(2, t1.flat, t2.flat)
            best = max(phi1, phi2)
            loc = f"{t1} vs {t2}"
            if x1 > 0 and (phi1 < best or phi1 < 0):
                misallocated += 1
                report.greater_equal("highest_virtual_value", loc, phi1, max(best, ZERO))
            if x2 > 0 and (phi2 < best or phi2 < 0):
                misallocated += 1
                report.greater_equal("highest_virtual_value", loc, phi2, max(best, ZERO))
            if best > 0 and x1 + x2 != 1:
                misallocated += 1
                report.equal("allocate_when_positive", loc, x1 + x2, ONE)
    if not misallocated:
        report.holds("highest_virtual_value", "all profiles", True)

    report.extend(bic_violations(inst, f))
    return report.build()


def misallocated_levels(report: CertificateReport) -> set[int]:
    """Value levels of Bidder One at which the allocation condition failed."""
    levels = set()
    for check in report.by_condition("highest_virtual_value"):
        if not check.passed:
            levels.add(int(check.location.split(",")[0].removeprefix("(v")))
    return levels


def tail_indifference(inst: Instance, m: Mechanism, k_star: int) -> CertificateReport:
    """Bidder One's truthful day-1 and day-2 utilities agree at every level above ``k_star``."""
    f = interim_form(inst, m)
    spec = inst.bidder1
    report = ReportBuilder()
    for k in range(k_star + 1, spec.n + 1):
        value = spec.value(k)
        report.equal(
            "tail_indifference",
            f"bidder 1 k={k}",
            f.utility(1, value, TypeLabel(k, Interest.DAY2)),
            f.utility(1, value, TypeLabel(k, Interest.DAY1)),
        )
    return report.build()


# ============ Execution ============


def sample_outcome(m: Mechanism, t1: TypeLabel, t2: TypeLabel, rng: Random) -> Optional[int]:
    """Draw the winner (1, 2 or None) at a profile with exact probabilities."""
    x1 = m.alloc(1, t1.flat, t2.flat)
    both = x1 + m.alloc(2, t1.flat, t2.flat)
    scale = lcm(x1.denominator, both.denominator)
    draw = Fraction(rng.randrange(scale), scale)
    if draw < x1:
        return 1
    if draw < both:
        return 2
    return None


def outcome_support(m: Mechanism, t1: TypeLabel, t2: TypeLabel) -> frozenset[Optional[int]]:
    """Outcomes with nonzero probability at ``(t1, t2)``."""
    x1, x2 = m.alloc(1, t1.flat, t2.flat), m.alloc(2, t1.flat, t2.flat)
    return support_of(x1, x2)


def support_of(x1: Fraction, x2: Fraction) -> frozenset[Optional[int]]:
    out: set[Optional[int]] = set()
    if x1 > 0:
        out.add(1)
    if x2 > 0:
        out.add(2)
    if x1 + x2 < 1:
        out.add(None)
    return frozenset(out)


# ============ Certified auctions on reduction instances ============


@dataclass(frozen=True)
class CertifiedAuction:
    """A mechanism together with the flow that witnesses its optimality."""

    mechanism: Mechanism
    flow: Flow
    report: CertificateReport
    eps: Fraction = ZERO
    k_star: Optional[int] = None


def _needs_boost(inst: Instance, vv: VirtualValueTable) -> bool:
    for k in range(1, inst.bidder1.n + 1):
        d = vv.get(1, k, Interest.DAY2)
        e = vv.get(2, k, Interest.DAY1)
        if d is not None and e is not None and d < e:
            return True
    return False


def optimal_rule(inst: Instance) -> tuple[str, AllocationRule]:
    """Allocation rule of the certified auction without tabulating it.

    Tie-breaking for Bidder One when every day-2 virtual value already
    dominates Bidder Two's at the same level, careful tie-breaking otherwise.
    """
    vv = virtual_values(inst, canonical_flow(inst))
    if not _needs_boost(inst, vv):
        return "spa1", spa_bidder1_rule(inst)
    modified = modified_flow(inst)
    if modified.k_star is None:
        raise MechanismError("Boosted flow has no tie level", {"eps": modified.eps})
    return f"careful@{modified.k_star}", careful_rule(inst, modified.k_star)


def certified_auction(inst: Instance) -> CertifiedAuction:
    """Canonical flow first; if the tie-for-Bidder-One auction is not witnessed,
    boost to the modified flow and certify careful tie-breaking.

    Args:
        inst: A reduction instance.

    Returns:
        The mechanism, its witnessing flow and the certificate report. The
        report may fail (below N_min, for instance); callers check
        ``report.passed``.
    """
    flow = canonical_flow(inst)
    mechanism = spa_bidder1(inst)
    report = witness_report(inst, flow, mechanism)
    if report.passed:
        return CertifiedAuction(mechanism, flow, report)
    modified = modified_flow(inst)
    if modified.k_star is None:
        logger.warning("canonical certificate failed and no tie level exists")
        return CertifiedAuction(mechanism, flow, report, modified.eps, None)
    mechanism = spa_careful(inst, modified.k_star)
    report = witness_report(inst, modified.flow, mechanism)
    return CertifiedAuction(mechanism, modified.flow, report, modified.eps, modified.k_star)
