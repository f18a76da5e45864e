"""Exact rational arithmetic and the two-bidder FedEx instance model.

All probabilities, payments, multipliers and virtual values in auctionlab are
``fractions.Fraction`` values. Types are addressed either by a ``TypeLabel``
(value index ``k`` plus interest) or by their flat index in the canonical
order ``t0, (v1,1), (v1,2), (v2,1), ...``.
"""

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union
import math

from .errors import (
    NegativeProbabilityError,
    ProbabilitySumError,
    RationalFormatError,
    ShapeError,
    TypeIndexError,
    ValueOrderError,
)

Rational = Fraction
RationalLike = Union[Fraction, int, str]


# ============ Rationals ============


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"p/q"`` (or an integer literal) into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise RationalFormatError(
            f"Expected rational text, got {type(text).__name__}", {"value": text}
        )
    raw = text.strip()
    num, sep, den = raw.partition("/")
    try:
        numerator = int(num)
        denominator = int(den) if sep else 1
    except ValueError:
        raise RationalFormatError(f"Invalid rational: {text!r}", {"value": text})
    if denominator == 0:
        raise RationalFormatError(f"Zero denominator: {text!r}", {"value": text})
    return Fraction(numerator, denominator)


def render_rational(q: RationalLike) -> str:
    """Render a rational as lowest-terms ``"p/q"`` (denominator always present)."""
    value = Fraction(q)
    return f"{value.numerator}/{value.denominator}"


def exact_floor(q: Fraction) -> int:
    return math.floor(q)


def exact_ceil(q: Fraction) -> int:
    return math.ceil(q)


# ============ Types ============


class Interest(IntEnum):
    """Shipping interest: one-day or two-day."""

    DAY1 = 1
    DAY2 = 2


INTERESTS = (Interest.DAY1, Interest.DAY2)


@dataclass(frozen=True, order=True)
class TypeLabel:
    """A bidder type ``(v^k, interest)``; ``k = 0`` is the null type t0."""

    k: int
    interest: Interest = Interest.DAY1

    @property
    def is_null(self) -> bool:
        return self.k == 0

    @property
    def flat(self) -> int:
        if self.k == 0:
            return 0
        return 2 * self.k + int(self.interest) - 2

    @classmethod
    def from_flat(cls, index: int) -> "TypeLabel":
        if index < 0:
            raise TypeIndexError(f"Negative type index {index}", {"index": index})
        if index == 0:
            return NULL_TYPE
        k, rem = divmod(index + 1, 2)
        return cls(k, Interest.DAY1 if rem == 0 else Interest.DAY2)

    def __str__(self) -> str:
        if self.is_null:
            return "t0"
        return f"(v{self.k},{int(self.interest)})"


NULL_TYPE = TypeLabel(0, Interest.DAY1)


# ============ Bidders and instances ============


@dataclass(frozen=True)
class BidderSpec:
    """Value grid and per-type probabilities for one FedEx bidder."""

    values: tuple[int, ...]
    day1: tuple[Fraction, ...]
    day2: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def type_count(self) -> int:
        """Number of types including t0."""
        return 2 * self.n + 1

    def probs(self, interest: Interest) -> tuple[Fraction, ...]:
        return self.day1 if interest == Interest.DAY1 else self.day2

    def value(self, k: int) -> int:
        """Value ``v^k``; ``v^0 = 0``."""
        if k == 0:
            return 0
        self._check_level(k)
        return self.values[k - 1]

    def f(self, k: int, interest: Interest) -> Fraction:
        """Probability of type ``(v^k, interest)``; zero for t0."""
        if k == 0:
            return Fraction(0)
        self._check_level(k)
        return self.probs(interest)[k - 1]

    def mass_at(self, flat: int) -> Fraction:
        label = self.label(flat)
        return self.f(label.k, label.interest)

    def value_at(self, flat: int) -> int:
        return self.value(self.label(flat).k)

    def label(self, flat: int) -> TypeLabel:
        if not 0 <= flat < self.type_count:
            raise TypeIndexError(
                f"Type index {flat} outside [0, {self.type_count - 1}]",
                {"index": flat},
            )
        return TypeLabel.from_flat(flat)

    def labels(self) -> Iterator[TypeLabel]:
        """Non-null types in flat order."""
        for k in range(1, self.n + 1):
            for interest in INTERESTS:
                yield TypeLabel(k, interest)

    @cached_property
    def _tails(self) -> dict[Interest, tuple[Fraction, ...]]:
        tails = {}
        for interest in INTERESTS:
            acc = Fraction(0)
            out = [Fraction(0)] * (self.n + 2)
            probs = self.probs(interest)
            for k in range(self.n, 0, -1):
                acc += probs[k - 1]
                out[k] = acc
            tails[interest] = tuple(out)
        return tails

    def tail(self, k: int, interest: Interest) -> Fraction:
        """``R((v^k, interest))`` for ``1 <= k <= n + 1``."""
        if not 1 <= k <= self.n + 1:
            raise TypeIndexError(
                f"Tail index {k} outside [1, {self.n + 1}]", {"k": k, "n": self.n}
            )
        return self._tails[interest][k]

    def _check_level(self, k: int) -> None:
        if not 1 <= k <= self.n:
            raise TypeIndexError(
                f"Value index {k} outside [1, {self.n}]", {"k": k, "n": self.n}
            )


@dataclass(frozen=True)
class Instance:
    """Two FedEx bidders."""

    bidders: tuple[BidderSpec, BidderSpec]

    @property
    def bidder1(self) -> BidderSpec:
        return self.bidders[0]

    @property
    def bidder2(self) -> BidderSpec:
        return self.bidders[1]

    def bidder(self, i: int) -> BidderSpec:
        if i not in (1, 2):
            raise TypeIndexError(f"Bidder index must be 1 or 2, got {i}", {"bidder": i})
        return self.bidders[i - 1]

    def opponent(self, i: int) -> BidderSpec:
        return self.bidder(3 - i)

    def type_value(self, i: int, flat: int) -> int:
        return self.bidder(i).value_at(flat)

    def mass(self, i: int, flat: int) -> Fraction:
        return self.bidder(i).mass_at(flat)

    @property
    def shared_grid(self) -> bool:
        return self.bidder1.values == self.bidder2.values


def make_bidder(
    values: Sequence[int],
    day1: Sequence[RationalLike],
    day2: Sequence[RationalLike],
) -> BidderSpec:
    """Build a BidderSpec, coercing probabilities to Fractions (not validated)."""
    return BidderSpec(
        values=tuple(int(v) for v in values),
        day1=tuple(parse_rational(p) for p in day1),
        day2=tuple(parse_rational(p) for p in day2),
    )


def validate_bidder(spec: BidderSpec, index: int) -> None:
    """Raise on any BidderSpec invariant violation."""
    if spec.n < 1:
        raise ShapeError(f"Bidder {index} has no value levels", {"bidder": index})
    if len(spec.day1) != spec.n or len(spec.day2) != spec.n:
        raise ShapeError(
            f"Bidder {index} probability tables must have {spec.n} entries",
            {"bidder": index, "day1": len(spec.day1), "day2": len(spec.day2)},
        )
    previous = -1
    for k, v in enumerate(spec.values, start=1):
        if v < 0 or v <= previous:
            raise ValueOrderError(
                f"Bidder {index} values must be strictly increasing nonnegative "
                f"integers (v{k} = {v})",
                {"bidder": index, "k": k, "value": v},
            )
        previous = v
    for interest in INTERESTS:
        for k, p in enumerate(spec.probs(interest), start=1):
            if p < 0:
                raise NegativeProbabilityError(
                    f"Bidder {index} has negative probability at (v{k},{int(interest)})",
                    {"bidder": index, "k": k, "interest": int(interest), "p": p},
                )
    total = sum(spec.day1, Fraction(0)) + sum(spec.day2, Fraction(0))
    if total != 1:
        raise ProbabilitySumError(
            f"Bidder {index} probabilities sum to {total}, expected 1",
            {"bidder": index, "total": total},
        )


def make_instance(b1: BidderSpec, b2: BidderSpec) -> Instance:
    """Validate both bidders and return an Instance."""
    validate_bidder(b1, 1)
    validate_bidder(b2, 2)
    return Instance(bidders=(b1, b2))


def reverse_mass(inst: Instance, bidder: int, k: int, j: Interest) -> Fraction:
    """Tail mass ``R_i((v^k, j)) = sum_{k' >= k} f_i((v^k', j))``."""
    return inst.bidder(bidder).tail(k, Interest(j))
