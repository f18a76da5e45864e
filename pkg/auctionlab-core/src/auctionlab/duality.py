"""Lagrangian flows and virtual values for two FedEx bidders.

A flow puts multiplier ``alpha_i(k)`` on the interest constraint at level
``k`` and ``lambda_i^j(k)`` on the downward constraint from ``(v^k, j)`` to
``(v^{k-1}, j)``. By convention ``lambda_i^j(n_i + 1) = 0`` and
``v_i^{n_i + 1} = v_i^{n_i}``.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Optional, Sequence
import logging

from .certificate import CertificateReport, ReportBuilder
from .errors import BoostTooLargeError, FlowInvalidError, ShapeError
from .numerics import INTERESTS, Instance, Interest, TypeLabel

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


# ============ Flow tables ============


@dataclass(frozen=True)
class BidderFlow:
    """Multipliers for one bidder; entry ``k - 1`` holds level ``k``."""

    alpha: tuple[Fraction, ...]
    lambda1: tuple[Fraction, ...]
    lambda2: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.alpha)

    def alpha_at(self, k: int) -> Fraction:
        return self.alpha[k - 1]

    def lam(self, interest: Interest, k: int) -> Fraction:
        """``lambda^j(k)`` for ``1 <= k <= n + 1``."""
        if k == self.n + 1:
            return ZERO
        table = self.lambda1 if interest == Interest.DAY1 else self.lambda2
        return table[k - 1]

    def multipliers(self) -> Iterator[Fraction]:
        yield from self.alpha
        yield from self.lambda1
        yield from self.lambda2


@dataclass(frozen=True)
class Flow:
    bidders: tuple[BidderFlow, BidderFlow]

    def bidder(self, i: int) -> BidderFlow:
        return self.bidders[i - 1]

    def with_bidder(self, i: int, flow: BidderFlow) -> "Flow":
        updated = list(self.bidders)
        updated[i - 1] = flow
        return Flow(tuple(updated))


def make_flow(
    alpha: Sequence[Sequence[Fraction]],
    lambda1: Sequence[Sequence[Fraction]],
    lambda2: Sequence[Sequence[Fraction]],
) -> Flow:
    """Assemble a Flow from per-bidder lists (index 0 is Bidder One)."""
    return Flow(
        tuple(
            BidderFlow(
                alpha=tuple(Fraction(v) for v in alpha[i]),
                lambda1=tuple(Fraction(v) for v in lambda1[i]),
                lambda2=tuple(Fraction(v) for v in lambda2[i]),
            )
            for i in range(2)
        )
    )


def _check_shape(inst: Instance, fl: Flow) -> None:
    for i in (1, 2):
        n = inst.bidder(i).n
        bf = fl.bidder(i)
        sizes = (len(bf.alpha), len(bf.lambda1), len(bf.lambda2))
        if sizes != (n, n, n):
            raise ShapeError(
                f"Flow tables for bidder {i} have sizes {sizes}, expected {n}",
                {"bidder": i, "sizes": sizes, "n": n},
            )


# ============ Flow conditions ============


def is_flow(inst: Instance, fl: Flow) -> CertificateReport:
    """Check nonnegativity and the four balance equations for both bidders."""
    _check_shape(inst, fl)
    report = ReportBuilder()
    for i in (1, 2):
        spec, bf = inst.bidder(i), fl.bidder(i)
        n = spec.n
        for k in range(1, n + 1):
            for name, value in (
                ("alpha", bf.alpha_at(k)),
                ("lambda1", bf.lam(Interest.DAY1, k)),
                ("lambda2", bf.lam(Interest.DAY2, k)),
            ):
                report.greater_equal("nonnegative", f"bidder {i} {name}({k})", value, 0)
        for k in range(1, n + 1):
            loc = f"bidder {i} k={k}"
            day1_in = spec.f(k, Interest.DAY1) + bf.lam(Interest.DAY1, k + 1) + bf.alpha_at(k)
            report.equal("day1_balance", loc, day1_in, bf.lam(Interest.DAY1, k))
            day2_in = spec.f(k, Interest.DAY2) + bf.lam(Interest.DAY2, k + 1)
            report.equal(
                "day2_balance", loc, day2_in, bf.alpha_at(k) + bf.lam(Interest.DAY2, k)
            )
    return report.build()


def require_flow(inst: Instance, fl: Flow) -> None:
    report = is_flow(inst, fl)
    if not report.passed:
        first = report.failures[0]
        raise FlowInvalidError(
            f"Multipliers do not form a flow: {first.describe()}",
            {"violations": len(report.failures)},
        )


# ============ Virtual values ============


@dataclass(frozen=True)
class VirtualValueTable:
    """``Phi_i((v^k, j))`` for every positive-mass type."""

    phi: tuple[dict[TypeLabel, Fraction], dict[TypeLabel, Fraction]]

    def get(self, i: int, k: int, interest: Interest = Interest.DAY1) -> Optional[Fraction]:
        return self.phi[i - 1].get(TypeLabel(k, Interest(interest)))

    def at(self, i: int, label: TypeLabel) -> Optional[Fraction]:
        return self.phi[i - 1].get(label)

    def items(self, i: int) -> list[tuple[TypeLabel, Fraction]]:
        return sorted(self.phi[i - 1].items())

    def level(self, i: int, k: int) -> list[Fraction]:
        return [p for label, p in self.phi[i - 1].items() if label.k == k]


def _value_step(inst: Instance, i: int, k: int) -> int:
    spec = inst.bidder(i)
    if k == spec.n:
        return 0
    return spec.value(k + 1) - spec.value(k)


def weighted_virtual_value(
    inst: Instance, fl: Flow, i: int, k: int, interest: Interest
) -> Fraction:
    """``f * Phi = f * v^k - (v^{k+1} - v^k) * lambda^j(k+1)``; defined at zero mass too."""
    spec = inst.bidder(i)
    mass = spec.f(k, interest)
    return mass * spec.value(k) - _value_step(inst, i, k) * fl.bidder(i).lam(interest, k + 1)


def virtual_values(inst: Instance, fl: Flow) -> VirtualValueTable:
    _check_shape(inst, fl)
    tables: list[dict[TypeLabel, Fraction]] = []
    for i in (1, 2):
        spec = inst.bidder(i)
        table = {}
        for label in spec.labels():
            mass = spec.f(label.k, label.interest)
            if mass > 0:
                table[label] = (
                    weighted_virtual_value(inst, fl, i, label.k, label.interest) / mass
                )
        tables.append(table)
    return VirtualValueTable((tables[0], tables[1]))


# ============ Canonical flow and boosting ============


def canonical_flow(inst: Instance) -> Flow:
    """``alpha = 0`` and ``lambda^j(k) = R((v^k, j))``."""
    flows = []
    for spec in inst.bidders:
        n = spec.n
        flows.append(
            BidderFlow(
                alpha=(ZERO,) * n,
                lambda1=tuple(spec.tail(k, Interest.DAY1) for k in range(1, n + 1)),
                lambda2=tuple(spec.tail(k, Interest.DAY2) for k in range(1, n + 1)),
            )
        )
    return Flow(tuple(flows))


def boost(inst: Instance, fl: Flow, bidder: int, k: int, eps: Fraction) -> Flow:
    """Move ``eps`` from day-2 onto day-1 links below ``k`` and onto ``alpha(k)``."""
    _check_shape(inst, fl)
    eps = Fraction(eps)
    bf = fl.bidder(bidder)
    if not 1 <= k <= bf.n:
        raise BoostTooLargeError(
            f"Boost level {k} outside [1, {bf.n}]", {"bidder": bidder, "k": k}
        )
    if eps < 0:
        raise BoostTooLargeError(f"Boost must be nonnegative, got {eps}", {"eps": eps})
    for level in range(1, k + 1):
        available = bf.lam(Interest.DAY2, level)
        if eps > available:
            raise BoostTooLargeError(
                f"Boost {eps} exceeds lambda2({level}) = {available} for bidder {bidder}",
                {"bidder": bidder, "k": level, "eps": eps, "lambda2": available},
            )
    if eps == 0:
        return fl
    alpha = list(bf.alpha)
    lambda1 = list(bf.lambda1)
    lambda2 = list(bf.lambda2)
    alpha[k - 1] += eps
    for level in range(k):
        lambda1[level] += eps
        lambda2[level] -= eps
    boosted = replace(bf, alpha=tuple(alpha), lambda1=tuple(lambda1), lambda2=tuple(lambda2))
    return fl.with_bidder(bidder, boosted)


@dataclass(frozen=True)
class ModifiedFlow:
    flow: Flow
    eps: Fraction
    k_star: Optional[int]


def modified_flow(inst: Instance) -> ModifiedFlow:
    """Boost the canonical flow at Bidder One's top level.

    ``eps`` is the largest ``(Phi(e^k) - Phi(d^k)) * f1(k, 2) / (v^{k+1} - v^k)``
    over the levels below the top, which is the least boost that lifts every
    day-2 virtual value of Bidder One to Bidder Two's at the same level.

    Args:
        inst: A reduction instance (both bidders on one value grid).

    Returns:
        The boosted flow, ``eps`` and the first level ``k_star`` where the
        two virtual values tie (``None`` when no boost was needed).

    Raises:
        ShapeError: If the bidders do not share a value grid.
    """
    if not inst.shared_grid:
        raise ShapeError("Modified flow needs a shared value grid", {})
    n1 = inst.bidder1.n
    base = canonical_flow(inst)
    vv = virtual_values(inst, base)
    eps = ZERO
    for k in range(1, n1):
        phi_d = vv.get(1, k, Interest.DAY2)
        phi_e = vv.get(2, k, Interest.DAY1)
        if phi_d is None or phi_e is None:
            continue
        mass = inst.bidder1.f(k, Interest.DAY2)
        needed = (phi_e - phi_d) * mass / _value_step(inst, 1, k)
        eps = max(eps, needed)
    boosted = boost(inst, base, 1, n1, eps)
    k_star = None
    if eps > 0:
        after = virtual_values(inst, boosted)
        for k in range(1, n1):
            phi_d = after.get(1, k, Interest.DAY2)
            if phi_d is not None and phi_d == after.get(2, k, Interest.DAY1):
                k_star = k
                break
    logger.debug("modified flow eps=%s k_star=%s", eps, k_star)
    return ModifiedFlow(flow=boosted, eps=eps, k_star=k_star)


# ============ Lagrangian ============


def lagrangian_value(inst: Instance, fl: Flow, interim) -> Fraction:
    """``sum_i sum_t pi_i(t) * f_i(t) * Phi_i(t)``, evaluated through the
    weighted virtual value so zero-mass types contribute exactly zero."""
    require_flow(inst, fl)
    total = ZERO
    for i in (1, 2):
        spec = inst.bidder(i)
        for label in spec.labels():
            total += interim.pi_at(i, label) * weighted_virtual_value(
                inst, fl, i, label.k, label.interest
            )
    return total


def lagrangian_long_form(inst: Instance, fl: Flow, interim) -> Fraction:
    """The relaxation objective with explicit payment terms."""
    _check_shape(inst, fl)
    total = ZERO
    for i in (1, 2):
        spec, bf = inst.bidder(i), fl.bidder(i)

        def util(true_k: int, report: TypeLabel) -> Fraction:
            return interim.pi_at(i, report) * spec.value(true_k) - interim.p_at(i, report)

        for label in spec.labels():
            total += spec.f(label.k, label.interest) * interim.p_at(i, label)
        for k in range(1, spec.n + 1):
            day1, day2 = TypeLabel(k, Interest.DAY1), TypeLabel(k, Interest.DAY2)
            total += bf.alpha_at(k) * (util(k, day2) - util(k, day1))
            for interest in INTERESTS:
                below = TypeLabel(k - 1, interest) if k > 1 else TypeLabel(0)
                here = TypeLabel(k, interest)
                total += bf.lam(interest, k) * (util(k, here) - util(k, below))
    return total


# ============ Reduction-instance properties ============


def _phi_or_fail(report: ReportBuilder, vv: VirtualValueTable, i: int, k: int, j: Interest):
    value = vv.get(i, k, j)
    if value is None:
        report.holds("defined", f"bidder {i} {TypeLabel(k, j)}", False)
    return value


def _cross_level_checks(report: ReportBuilder, vv: VirtualValueTable, levels: int) -> None:
    for j in INTERESTS:
        for k in range(1, levels + 1):
            one = _phi_or_fail(report, vv, 1, k, j)
            for k2 in range(1, levels + 1):
                if k2 == k:
                    continue
                two = _phi_or_fail(report, vv, 2, k2, Interest.DAY1)
                if one is None or two is None:
                    continue
                loc = f"{TypeLabel(k, j)} vs e{k2}"
                if k > k2:
                    report.greater("higher_level_wins", loc, one, two)
                else:
                    report.less("lower_level_loses", loc, one, two)


def _common_tail_checks(report: ReportBuilder, inst: Instance, vv: VirtualValueTable) -> None:
    top = inst.bidder1.n
    top_e = vv.get(2, top, Interest.DAY1)
    for j in INTERESTS:
        top_one = vv.get(1, top, j)
        if top_one is not None and top_e is not None:
            report.equal("top_equal", f"{TypeLabel(top, j)} vs e{top}", top_one, top_e)
    for i in (1, 2):
        for label, value in vv.items(i):
            report.greater("positive", f"bidder {i} {label}", value, 0)


def level_separation(inst: Instance, vv: VirtualValueTable) -> CertificateReport:
    """Every virtual value at level ``i`` sits below every one at ``i + 1``."""
    report = ReportBuilder()
    levels = inst.bidder1.n
    for i in range(1, levels):
        low = vv.level(1, i) + vv.level(2, i)
        high = vv.level(1, i + 1) + vv.level(2, i + 1)
        if not low or not high:
            continue
        gap = min(high) - max(low)
        report.greater("level_separation", f"levels {i}/{i + 1}", gap, 0)
        if i >= 2:
            report.greater_equal("level_gap", f"levels {i}/{i + 1}", gap, 1)
    return report.build()


def canonical_properties(inst: Instance, bits, vv: VirtualValueTable) -> CertificateReport:
    """Exact separation properties of the canonical flow on a reduction instance.

    ``bits`` is the DisjInput the instance was built from.
    """
    report = ReportBuilder()
    n = bits.n
    _cross_level_checks(report, vv, n + 2)
    for k in range(1, n + 1):
        level = k + 1
        c = vv.get(1, level, Interest.DAY1)
        d = vv.get(1, level, Interest.DAY2)
        e = vv.get(2, level, Interest.DAY1)
        if None in (c, d, e):
            report.holds("defined", f"level {level}", False)
            continue
        loc = f"level {level}"
        if bits.x[k - 1] and bits.y[k - 1]:
            report.greater("intersection_order", loc, c, e)
            report.greater("intersection_order", loc, e, d)
        else:
            report.greater("bidder_one_ahead", f"c{level} vs e{level}", c, e)
            report.greater("bidder_one_ahead", f"d{level} vs e{level}", d, e)
    e1 = vv.get(2, 1, Interest.DAY1)
    for j in INTERESTS:
        one = vv.get(1, 1, j)
        if one is not None and e1 is not None:
            report.greater("lowest_level_bidder_one", f"{TypeLabel(1, j)} vs e1", one, e1)
    _common_tail_checks(report, inst, vv)
    c1 = vv.get(1, 1, Interest.DAY1)
    if c1 is not None:
        report.equal("lowest_closed_form", "c1", c1, n * n - 10 * n + 2)
    report.extend(level_separation(inst, vv))
    return report.build()


def modified_properties(
    inst: Instance, bits, modified: ModifiedFlow
) -> CertificateReport:
    """Exact properties of the boosted flow on a reduction instance."""
    report = ReportBuilder()
    report.extend(is_flow(inst, modified.flow))
    vv = virtual_values(inst, modified.flow)
    n = bits.n
    _cross_level_checks(report, vv, n + 2)
    for k in range(2, n + 3):
        e = vv.get(2, k, Interest.DAY1)
        for j in INTERESTS:
            one = vv.get(1, k, j)
            if one is not None and e is not None:
                report.greater_equal("bidder_one_weakly_ahead", f"{TypeLabel(k, j)} vs e{k}", one, e)
    if not bits.disjoint:
        k_star = modified.k_star
        if k_star is None or not 2 <= k_star <= n + 1:
            report.holds("tie_level", f"k*={k_star}", False)
        else:
            report.equal(
                "tie_level",
                f"k*={k_star}",
                vv.get(1, k_star, Interest.DAY2),
                vv.get(2, k_star, Interest.DAY1),
            )
        c1 = vv.get(1, 1, Interest.DAY1)
        d1 = vv.get(1, 1, Interest.DAY2)
        e1 = vv.get(2, 1, Interest.DAY1)
        report.greater("lowest_level_order", "d1 vs e1", d1, e1)
        report.greater("lowest_level_order", "e1 vs c1", e1, c1)
    _common_tail_checks(report, inst, vv)
    return report.build()


def equal_level_gaps(inst: Instance, bits, vv: VirtualValueTable) -> dict[str, list[Fraction]]:
    """Per-level gaps ``Phi(c) - Phi(e)`` and, at intersecting levels, ``Phi(e) - Phi(d)``."""
    gaps: dict[str, list[Fraction]] = {"c_minus_e": [], "e_minus_d": []}
    for k in range(1, bits.n + 1):
        level = k + 1
        c = vv.get(1, level, Interest.DAY1)
        d = vv.get(1, level, Interest.DAY2)
        e = vv.get(2, level, Interest.DAY1)
        if c is not None and e is not None:
            gaps["c_minus_e"].append(c - e)
        if bits.x[k - 1] and bits.y[k - 1] and d is not None and e is not None:
            gaps["e_minus_d"].append(e - d)
    return gaps
