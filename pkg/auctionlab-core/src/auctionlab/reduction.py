"""DISJ-parameterized FedEx instances.

Alice's bits ``x`` shape Bidder One's day-2 distribution and Bob's bits ``y``
shape Bidder Two's (day-1 only) distribution. Both bidders share the value
grid ``n^2 + 1, ..., n^2 + n + 2``. Every distribution is nearly uniform
above the lowest level and built from an integer recurrence on helper values
``z_2, ..., z_{n+2}``.

Naming follows the usual shorthand: ``c`` is Bidder One day 1, ``d`` is
Bidder One day 2, ``e`` is Bidder Two.
"""

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Callable, Iterator, Optional, Sequence
import logging

from .certificate import CertificateReport, ReportBuilder
from .errors import BitsFormatError, LengthMismatchError
from .numerics import Instance, exact_ceil, exact_floor, make_bidder, make_instance

logger = logging.getLogger(__name__)

Bits = tuple[int, ...]


def parse_bits(text: str) -> Bits:
    """Parse a ``'0'``/``'1'`` string such as ``"1001"``."""
    cleaned = text.strip()
    if not cleaned or any(ch not in "01" for ch in cleaned):
        raise BitsFormatError(f"Invalid bit string: {text!r}", {"bits": text})
    return tuple(int(ch) for ch in cleaned)


def render_bits(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


@dataclass(frozen=True)
class DisjInput:
    """Alice's ``x`` and Bob's ``y``, both of length ``n >= 1``."""

    x: Bits
    y: Bits

    def __post_init__(self):
        for name, bits in (("x", self.x), ("y", self.y)):
            if any(b not in (0, 1) for b in bits):
                raise BitsFormatError(f"{name} must contain only 0/1", {name: bits})
        if len(self.x) != len(self.y) or len(self.x) < 1:
            raise LengthMismatchError(
                f"x and y must have equal positive length ({len(self.x)} vs {len(self.y)})",
                {"x": len(self.x), "y": len(self.y)},
            )

    @classmethod
    def from_text(cls, x: str, y: str) -> "DisjInput":
        return cls(parse_bits(x), parse_bits(y))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def intersections(self) -> list[int]:
        """1-based indices ``k`` with ``x_k = y_k = 1``."""
        return [k for k, (a, b) in enumerate(zip(self.x, self.y), start=1) if a and b]

    @property
    def disjoint(self) -> bool:
        return not self.intersections

    def __str__(self) -> str:
        return f"x={render_bits(self.x)} y={render_bits(self.y)}"


@dataclass(frozen=True)
class ReductionTrace:
    """Recurrence record for one distribution.

    ``z[0]`` is ``z_2`` and ``z[-1]`` is ``z_{n+2}``; ``scaled_probs[k-1]`` is
    ``f(v^k) * scale`` where ``scale`` is ``2b`` for Bidder One and ``b`` for
    Bidder Two, so the scaled entries always sum to ``b``.
    """

    kind: str
    n: int
    b: int
    a: Fraction
    z: tuple[Fraction, ...]
    scaled_probs: tuple[int, ...]
    scale: int
    bits: Optional[Bits] = None

    def z_at(self, k: int) -> Fraction:
        """Helper ``z_k`` for ``k`` in ``[2, n + 2]``."""
        return self.z[k - 2]

    def scaled(self, k: int) -> int:
        return self.scaled_probs[k - 1]

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(s, self.scale) for s in self.scaled_probs)


def reduction_constants(n: int) -> tuple[int, Fraction]:
    """``b = 10 n^6`` and ``a = (b - n^5) / (n + 1)``."""
    if n < 1:
        raise LengthMismatchError(f"n must be >= 1, got {n}", {"n": n})
    b = 10 * n**6
    return b, Fraction(b - n**5, n + 1)


def _run_recurrence(
    kind: str,
    n: int,
    first: int,
    scale: int,
    step: Callable[[int, Fraction], int],
    bits: Optional[Bits] = None,
) -> ReductionTrace:
    b, a = reduction_constants(n)
    scaled = [first]
    helpers: list[Fraction] = []
    for k in range(1, n + 1):
        z = Fraction(b - sum(scaled), n - k + 2)
        helpers.append(z)
        scaled.append(step(k, z))
    last = Fraction(b - sum(scaled))
    helpers.append(last)
    scaled.append(int(last))
    trace = ReductionTrace(
        kind=kind,
        n=n,
        b=b,
        a=a,
        z=tuple(helpers),
        scaled_probs=tuple(scaled),
        scale=scale,
        bits=bits,
    )
    logger.debug("%s(n=%d) scaled=%s", kind, n, trace.scaled_probs)
    return trace


def _check_bits(n: int, bits: Sequence[int], name: str) -> Bits:
    bits = tuple(bits)
    if len(bits) != n:
        raise LengthMismatchError(
            f"{name} has length {len(bits)}, expected {n}", {name: len(bits), "n": n}
        )
    return bits


def bidder1_day1(n: int) -> tuple[tuple[Fraction, ...], ReductionTrace]:
    """Bidder One's day-1 distribution (independent of ``x``)."""
    b, _ = reduction_constants(n)

    def step(k: int, z: Fraction) -> int:
        return exact_floor(z + Fraction(n**3, n - k + 2))

    trace = _run_recurrence("c", n, b // (10 * n), 2 * b, step)
    return trace.probs, trace


def bidder1_day2(n: int, x: Sequence[int]) -> tuple[tuple[Fraction, ...], ReductionTrace]:
    """Bidder One's day-2 distribution; ``x_k = 1`` rounds ``z_{k+1}`` up instead
    of adding the ``n^3`` bump."""
    x = _check_bits(n, x, "x")
    b, _ = reduction_constants(n)

    def step(k: int, z: Fraction) -> int:
        if x[k - 1] == 0:
            return exact_floor(z + Fraction(n**3, n - k + 2))
        return exact_ceil(z)

    trace = _run_recurrence("d", n, b // (10 * n), 2 * b, step, bits=x)
    return trace.probs, trace


def bidder2(n: int, y: Sequence[int]) -> tuple[tuple[Fraction, ...], ReductionTrace]:
    """Bidder Two's day-1 distribution; ``y_k = 1`` adds an ``n^2`` bump."""
    y = _check_bits(n, y, "y")
    b, _ = reduction_constants(n)

    def step(k: int, z: Fraction) -> int:
        if y[k - 1] == 1:
            return exact_floor(z + Fraction(n**2, n - k + 2))
        return exact_floor(z - 1)

    trace = _run_recurrence("e", n, b // (10 * n) - 1, b, step, bits=y)
    return trace.probs, trace


@dataclass(frozen=True)
class ReductionTraces:
    c: ReductionTrace
    d: ReductionTrace
    e: ReductionTrace

    def __iter__(self) -> Iterator[ReductionTrace]:
        return iter((self.c, self.d, self.e))


def value_grid(n: int) -> tuple[int, ...]:
    return tuple(n * n + k for k in range(1, n + 3))


def build_instance(d: DisjInput) -> tuple[Instance, ReductionTraces]:
    """Map ``(x, y)`` to the two-bidder instance and its recurrence traces.

    Args:
        d: The DISJ input; both strings have length ``n``.

    Returns:
        The instance on the grid ``n^2 + 1 .. n^2 + n + 2`` and one trace per
        recurrence (Bidder One day 1, Bidder One day 2, Bidder Two).
    """
    n = d.n
    day1, c_trace = bidder1_day1(n)
    day2, d_trace = bidder1_day2(n, d.x)
    bob, e_trace = bidder2(n, d.y)
    values = value_grid(n)
    inst = make_instance(
        make_bidder(values, day1, day2),
        make_bidder(values, bob, [Fraction(0)] * len(values)),
    )
    return inst, ReductionTraces(c_trace, d_trace, e_trace)


# ============ Input families ============


def random_disj_input(n: int, rng: Random) -> DisjInput:
    x = tuple(rng.randint(0, 1) for _ in range(n))
    y = tuple(rng.randint(0, 1) for _ in range(n))
    return DisjInput(x, y)


def structured_inputs(n: int) -> list[DisjInput]:
    """All-zeros, all-ones, and a single intersection at every position."""
    zeros = (0,) * n
    ones = (1,) * n
    cases = [DisjInput(zeros, zeros), DisjInput(ones, ones), DisjInput(ones, zeros)]
    for k in range(n):
        unit = tuple(1 if i == k else 0 for i in range(n))
        cases.append(DisjInput(unit, unit))
    return cases


# ============ Helper-sequence lemmas ============


def helper_lemma_report(trace: ReductionTrace) -> CertificateReport:
    """Exact checks of the mass, range and helper lemmas for one trace."""
    n, a = trace.n, trace.a
    n3, n2 = n**3, n**2
    report = ReportBuilder()
    kind = trace.kind

    report.equal("mass", f"{kind}", sum(trace.scaled_probs), trace.b)
    report.holds(
        "nonnegative", f"{kind}", all(s >= 0 for s in trace.scaled_probs)
    )

    spread = n3 if kind == "d" else 2 * n3
    for k in range(2, n + 3):
        report.within(
            "range", f"{kind} k={k}", trace.scaled(k), a - spread, a + spread
        )

    for i in range(1, n + 2):
        z = trace.z_at(i + 1)
        if kind == "e":
            report.within("helper_range", f"z{kind} i={i}", z, a - 2 * n2, a + 2 * n2)
        else:
            report.within("helper_range", f"z{kind} i={i}", z, a - n3, a)

    for i in range(1, n + 1):
        here, there = trace.z_at(i + 1), trace.z_at(i + 2)
        gap = here - there
        loc = f"z{kind} i={i}"
        if kind == "e":
            report.less("helper_nearly_monotone", loc, there, here + 2)
            if trace.bits[i - 1] == 1:
                report.less_equal(
                    "helper_gap", loc, gap, Fraction(n2, (n - i + 2) * (n - i + 1))
                )
            else:
                report.less_equal("helper_gap", loc, gap, Fraction(-1, n - i + 1))
                report.less("mass_below_helper", loc, trace.scaled(i + 1), there)
            continue
        report.less("helper_monotone", loc, there, here)
        if kind == "d" and trace.bits[i - 1] == 1:
            report.less_equal("helper_gap", loc, gap, Fraction(1, n - i + 1))
        else:
            report.less_equal(
                "helper_gap", loc, gap, Fraction(n3, (n - i + 2) * (n - i + 1))
            )
        if kind == "d":
            report.greater_equal("mass_above_helper", loc, trace.scaled(i + 1), there)

    if kind == "e":
        low = trace.scaled(1)
        for k in range(2, n + 3):
            report.less("lowest_lightest", f"e k={k}", low, trace.scaled(k))
    return report.build()
