"""Single-dimensional virtual values, ironing and the optimal single-item auction.

Ironing takes the upper concave envelope of the revenue curve
``(R(v^k), v^k * R(v^k))`` in tail-mass coordinates; ironed virtual values are
the envelope's segment slopes. Collinear curve points stay on the envelope,
so an already monotone sequence is left in singleton blocks.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Optional, Sequence
import logging

from .errors import (
    ProbabilitySumError,
    ValueNotInSupportError,
    ValueOrderError,
    ZeroMassError,
)
from .numerics import Instance, RationalLike, make_bidder, make_instance, parse_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class SingleDimDistribution:
    values: tuple[int, ...]
    probs: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    def tail(self, k: int) -> Fraction:
        """``R(v^k)`` for ``1 <= k <= n + 1``."""
        return sum(self.probs[k - 1 :], ZERO)

    def index_of(self, value: int) -> int:
        try:
            return self.values.index(value) + 1
        except ValueError:
            raise ValueNotInSupportError(
                f"Value {value} is not in the support {self.values}", {"value": value}
            )

    @cached_property
    def ironed(self) -> "IronedTable":
        return iron(self)


def make_distribution(values: Sequence[int], probs: Sequence[RationalLike]) -> SingleDimDistribution:
    """Validated distribution: strictly increasing values, positive mass, total one."""
    values = tuple(int(v) for v in values)
    probs = tuple(parse_rational(p) for p in probs)
    if len(values) != len(probs) or not values:
        raise ValueOrderError(
            "values and probs must be nonempty and of equal length",
            {"values": len(values), "probs": len(probs)},
        )
    if any(v < 0 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise ValueOrderError(f"Values must be strictly increasing: {values}", {"values": values})
    for k, p in enumerate(probs, start=1):
        if p <= 0:
            raise ZeroMassError(f"Support point v{k} has mass {p}", {"k": k, "p": p})
    total = sum(probs, ZERO)
    if total != 1:
        raise ProbabilitySumError(f"Probabilities sum to {total}", {"total": total})
    return SingleDimDistribution(values, probs)


def point_mass(value: int) -> SingleDimDistribution:
    return make_distribution([value], [1])


# ============ Virtual values and ironing ============


def single_dim_virtuals(d: SingleDimDistribution) -> tuple[Fraction, ...]:
    """``phi(v^k) = v^k - (v^{k+1} - v^k) R(v^{k+1}) / f(v^k)``, with ``phi(v^n) = v^n``."""
    out = []
    for k in range(1, d.n + 1):
        mass = d.probs[k - 1]
        if mass <= 0:
            raise ZeroMassError(f"Support point v{k} has no mass", {"k": k})
        if k == d.n:
            out.append(Fraction(d.values[-1]))
            continue
        step = d.values[k] - d.values[k - 1]
        out.append(d.values[k - 1] - step * d.tail(k + 1) / mass)
    return tuple(out)


@dataclass(frozen=True)
class IronedTable:
    """Maximal blocks ``(k, l)`` (1-based, inclusive) and the ironed values."""

    intervals: tuple[tuple[int, int], ...]
    phi_bar: tuple[Fraction, ...]

    def block_of(self, k: int) -> tuple[int, int]:
        for block in self.intervals:
            if block[0] <= k <= block[1]:
                return block
        raise IndexError(f"Index {k} outside the ironed table")

    def block_id(self, k: int) -> int:
        return self.intervals.index(self.block_of(k))

    def at(self, k: int) -> Fraction:
        return self.phi_bar[k - 1]


def _below_chord(o, a, b) -> bool:
    """``a`` lies strictly below the chord from ``o`` to ``b``."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) > 0


def iron_virtuals(masses: Sequence[Fraction], phis: Sequence[Fraction]) -> IronedTable:
    """Iron an arbitrary mass-weighted virtual value sequence (lowest level first)."""
    n = len(masses)
    if any(m <= 0 for m in masses):
        raise ZeroMassError("Ironing needs positive masses", {"masses": list(masses)})
    # (tail mass, weighted virtual sum, highest level below the point)
    points = [(ZERO, ZERO, n)]
    q, s = ZERO, ZERO
    for k in range(n, 0, -1):
        q += masses[k - 1]
        s += masses[k - 1] * phis[k - 1]
        points.append((q, s, k - 1))
    hull: list[tuple[Fraction, Fraction, int]] = []
    for point in points:
        while len(hull) >= 2 and _below_chord(hull[-2], hull[-1], point):
            hull.pop()
        hull.append(point)
    phi_bar = [ZERO] * n
    intervals = []
    for (q_a, s_a, top), (q_b, s_b, bottom) in zip(hull, hull[1:]):
        slope = (s_b - s_a) / (q_b - q_a)
        block = (bottom + 1, top)
        intervals.append(block)
        for k in range(block[0], block[1] + 1):
            phi_bar[k - 1] = slope
    intervals.sort()
    ironed = [b for b in intervals if b[0] != b[1]]
    if ironed:
        logger.debug("ironed blocks %s", ironed)
    return IronedTable(tuple(intervals), tuple(phi_bar))


def iron(d: SingleDimDistribution) -> IronedTable:
    return iron_virtuals(d.probs, single_dim_virtuals(d))


# ============ Compact encodings ============


@dataclass(frozen=True)
class EncodedVirtual:
    """``(upper - lower) / mass`` where upper and lower are revenue-curve heights."""

    upper: Fraction
    lower: Fraction
    mass: Fraction

    @property
    def value(self) -> Fraction:
        return (self.upper - self.lower) / self.mass


def _revenue_height(d: SingleDimDistribution, k: int) -> Fraction:
    if k > d.n:
        return ZERO
    return d.values[k - 1] * d.tail(k)


def encode_ironed(d: SingleDimDistribution, k: int) -> EncodedVirtual:
    """Encode ``phi_bar(v^k)`` through the endpoints of its ironed block."""
    if not 1 <= k <= d.n:
        raise IndexError(f"Index {k} outside [1, {d.n}]")
    low, high = d.ironed.block_of(k)
    return EncodedVirtual(
        upper=_revenue_height(d, low),
        lower=_revenue_height(d, high + 1),
        mass=d.tail(low) - d.tail(high + 1),
    )


def encode_virtual(d: SingleDimDistribution, k: int) -> EncodedVirtual:
    """Encode the raw ``phi(v^k)`` as a singleton block."""
    if not 1 <= k <= d.n:
        raise IndexError(f"Index {k} outside [1, {d.n}]")
    return EncodedVirtual(
        upper=_revenue_height(d, k),
        lower=_revenue_height(d, k + 1),
        mass=d.probs[k - 1],
    )


# ============ Optimal auction ============


def select_winner(scores: Sequence[Fraction]) -> Optional[int]:
    """Lowest index (1-based) with the highest nonnegative score."""
    best, winner = None, None
    for i, score in enumerate(scores, start=1):
        if score >= 0 and (best is None or score > best):
            best, winner = score, i
    return winner


def threshold_price(d: SingleDimDistribution, winner: int, others: dict[int, Fraction]) -> Fraction:
    """Smallest support value at which ``winner`` still wins, given the other
    bidders' ironed values (ties go to the lower index)."""
    table = d.ironed
    for k in range(1, d.n + 1):
        score = table.at(k)
        if score < 0:
            continue
        if all(score > other if j < winner else score >= other for j, other in others.items()):
            return Fraction(d.values[k - 1])
    raise ValueNotInSupportError("Winner has no winning support value", {"winner": winner})


def myerson_winner(
    ds: Sequence[SingleDimDistribution], vals: Sequence[int]
) -> tuple[Optional[int], Optional[Fraction]]:
    """Winner (1-based) and threshold price of the optimal auction."""
    scores = [d.ironed.at(d.index_of(v)) for d, v in zip(ds, vals)]
    winner = select_winner(scores)
    if winner is None:
        return None, None
    others = {j: s for j, s in enumerate(scores, start=1) if j != winner}
    return winner, threshold_price(ds[winner - 1], winner, others)


def myerson_revenue(ds: Sequence[SingleDimDistribution]) -> Fraction:
    """Exact expected revenue with threshold payments, enumerating all profiles."""
    total = ZERO
    for levels in product(*(range(1, d.n + 1) for d in ds)):
        weight = Fraction(1)
        for d, k in zip(ds, levels):
            weight *= d.probs[k - 1]
        _, price = myerson_winner(ds, [d.values[k - 1] for d, k in zip(ds, levels)])
        if price is not None:
            total += weight * price
    return total


def expected_ironed_surplus(ds: Sequence[SingleDimDistribution]) -> Fraction:
    """``E[max(0, phi_bar of the winner)]``; equals the optimal revenue."""
    total = ZERO
    for levels in product(*(range(1, d.n + 1) for d in ds)):
        weight = Fraction(1)
        scores = []
        for d, k in zip(ds, levels):
            weight *= d.probs[k - 1]
            scores.append(d.ironed.at(k))
        winner = select_winner(scores)
        if winner is not None:
            total += weight * scores[winner - 1]
    return total


def fedex_embedding(d1: SingleDimDistribution, d2: SingleDimDistribution) -> Instance:
    """Two-bidder FedEx instance where every type has day-1 interest."""
    return make_instance(
        make_bidder(d1.values, d1.probs, [ZERO] * d1.n),
        make_bidder(d2.values, d2.probs, [ZERO] * d2.n),
    )
