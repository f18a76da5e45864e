"""Two-party protocols with exact bit accounting.

Every integer travels as an 8-bit length field followed by its big-endian
magnitude, so payloads are self-delimiting and a transcript's bit count is
well defined. Rationals are the pair (signed numerator, denominator).
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence
import asyncio
import logging

from .channel import Endpoint, Transcript, duplex
from .errors import DecodeError, ProtocolError
from .lp_oracle import select_outcome
from .myerson import (
    EncodedVirtual,
    SingleDimDistribution,
    encode_ironed,
    select_winner,
    threshold_price,
)
from .numerics import BidderSpec, Interest, TypeLabel, make_bidder, make_instance
from .reduction import DisjInput, bidder1_day1, bidder1_day2, bidder2, build_instance, value_grid

logger = logging.getLogger(__name__)

SINGLE_DIM = "single-dim"
FULL = "full"
LOWEST = TypeLabel(1, Interest.DAY1)


# ============ Codes ============

LENGTH_FIELD_BITS = 8
MAX_PAYLOAD_BITS = (1 << LENGTH_FIELD_BITS) - 1


def encode_uint(n: int) -> str:
    """Fixed-width bit length, then the big-endian magnitude (empty for zero)."""
    if n < 0:
        raise ProtocolError(f"Cannot encode negative {n} as unsigned", {"value": n})
    length = n.bit_length()
    if length > MAX_PAYLOAD_BITS:
        raise ProtocolError(
            f"{length}-bit integer exceeds the {MAX_PAYLOAD_BITS}-bit payload limit",
            {"bits": length},
        )
    body = format(n, "b") if n else ""
    return format(length, f"0{LENGTH_FIELD_BITS}b") + body


def encode_int(z: int) -> str:
    return ("1" if z < 0 else "0") + encode_uint(abs(z))


def encode_rational(q: Fraction) -> str:
    """The pair (signed numerator, denominator) in lowest terms."""
    q = Fraction(q)
    return encode_int(q.numerator) + encode_uint(q.denominator)


class BitReader:
    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def _take(self, count: int) -> str:
        if self.pos + count > len(self.bits):
            raise DecodeError("Bit string ended early", {"pos": self.pos, "need": count})
        chunk = self.bits[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def read_uint(self) -> int:
        length = int(self._take(LENGTH_FIELD_BITS), 2)
        if length == 0:
            return 0
        body = self._take(length)
        if body[0] != "1":
            raise DecodeError("Payload has a leading zero", {"pos": self.pos - length})
        return int(body, 2)

    def read_int(self) -> int:
        negative = self._take(1) == "1"
        value = self.read_uint()
        return -value if negative else value

    def read_rational(self) -> Fraction:
        num = self.read_int()
        den = self.read_uint()
        if den == 0:
            raise DecodeError("Zero denominator", {"pos": self.pos})
        return Fraction(num, den)

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.bits)


def decode_rational(bits: str) -> Fraction:
    return BitReader(bits).read_rational()


def encode_virtual_payload(enc: EncodedVirtual) -> str:
    return encode_rational(enc.upper) + encode_rational(enc.lower) + encode_rational(enc.mass)


def decode_virtual_payload(bits: str) -> EncodedVirtual:
    reader = BitReader(bits)
    return EncodedVirtual(reader.read_rational(), reader.read_rational(), reader.read_rational())


def encode_bidder(spec: BidderSpec) -> str:
    parts = [encode_uint(spec.n)]
    for k in range(1, spec.n + 1):
        parts.append(encode_uint(spec.value(k)))
        parts.append(encode_rational(spec.f(k, Interest.DAY1)))
        parts.append(encode_rational(spec.f(k, Interest.DAY2)))
    return "".join(parts)


def decode_bidder(bits: str) -> BidderSpec:
    reader = BitReader(bits)
    count = reader.read_uint()
    values, day1, day2 = [], [], []
    for _ in range(count):
        values.append(reader.read_uint())
        day1.append(reader.read_rational())
        day2.append(reader.read_rational())
    return make_bidder(values, day1, day2)


def encode_support(support: frozenset[Optional[int]]) -> str:
    codes = sorted(0 if s is None else s for s in support)
    return encode_uint(len(codes)) + "".join(encode_uint(c) for c in codes)


def decode_support(bits: str) -> frozenset[Optional[int]]:
    reader = BitReader(bits)
    codes = [reader.read_uint() for _ in range(reader.read_uint())]
    return frozenset(None if c == 0 else c for c in codes)


# ============ Single-dimensional protocol ============


@dataclass(frozen=True)
class SingleDimOutcome:
    winner: Optional[int]
    price: Optional[Fraction]
    transcript: Transcript


async def _singledim_party(
    me: Endpoint, index: int, dist: SingleDimDistribution, value: int
) -> tuple[Optional[int], Optional[Fraction]]:
    own = encode_ironed(dist, dist.index_of(value))
    if index == 1:
        await me.send(encode_virtual_payload(own))
        theirs = decode_virtual_payload(await me.receive())
        scores = [own.value, theirs.value]
    else:
        theirs = decode_virtual_payload(await me.receive())
        await me.send(encode_virtual_payload(own))
        scores = [theirs.value, own.value]
    winner = select_winner(scores)
    if winner is None:
        return None, None
    if winner == index:
        price = threshold_price(dist, winner, {3 - index: scores[2 - index]})
        await me.send(encode_rational(price))
        return winner, price
    return winner, decode_rational(await me.receive())


async def run_singledim_protocol(
    d1: SingleDimDistribution, v1: int, d2: SingleDimDistribution, v2: int
) -> SingleDimOutcome:
    """Each party sends its encoded ironed virtual value; the winner sends the price."""
    d1.index_of(v1)
    d2.index_of(v2)
    transcript = Transcript(mode=SINGLE_DIM)
    alice, bob = duplex(transcript)
    (w1, p1), (w2, p2) = await asyncio.gather(
        _singledim_party(alice, 1, d1, v1), _singledim_party(bob, 2, d2, v2)
    )
    if (w1, p1) != (w2, p2):
        raise ProtocolError("Parties disagree on the outcome", {"alice": (w1, p1), "bob": (w2, p2)})
    logger.debug("single-dim protocol: winner=%s price=%s bits=%d", w1, p1, transcript.total_bits)
    return SingleDimOutcome(w1, p1, transcript)


# ============ Full-transfer protocol ============


@dataclass(frozen=True)
class FullTransferOutcome:
    outcome: frozenset[Optional[int]]
    transcript: Transcript


def fulltransfer_message(n: int, x: Sequence[int]) -> str:
    """Alice's opening message: her whole day-1/day-2 distribution."""
    day1, _ = bidder1_day1(n)
    day2, _ = bidder1_day2(n, x)
    return encode_bidder(make_bidder(value_grid(n), day1, day2))


async def run_fulltransfer_protocol(d: DisjInput, certify: bool = True) -> FullTransferOutcome:
    """Alice ships her whole distribution; Bob selects the outcome at the lowest profile."""
    transcript = Transcript(mode=FULL)
    alice, bob = duplex(transcript)
    n = d.n

    async def alice_side() -> frozenset[Optional[int]]:
        await alice.send(fulltransfer_message(n, d.x))
        return decode_support(await alice.receive())

    async def bob_side() -> frozenset[Optional[int]]:
        theirs = decode_bidder(await bob.receive())
        probs, _ = bidder2(n, d.y)
        mine = make_bidder(value_grid(n), probs, [Fraction(0)] * (n + 2))
        inst = make_instance(theirs, mine)
        support = select_outcome(inst, LOWEST, LOWEST, backend="flow", certify=certify)
        await bob.send(encode_support(support))
        return support

    seen_by_alice, seen_by_bob = await asyncio.gather(alice_side(), bob_side())
    if seen_by_alice != seen_by_bob:
        raise ProtocolError("Parties disagree on the outcome", {})
    return FullTransferOutcome(seen_by_bob, transcript)


# ============ Replay and DISJ ============


def replay_transcript(
    transcript: Transcript,
) -> tuple[Optional[int], Optional[Fraction]] | frozenset[Optional[int]]:
    """Recompute the protocol output from the transcript bits alone."""
    messages = transcript.messages
    if transcript.mode == SINGLE_DIM:
        if len(messages) < 2:
            raise DecodeError("Single-dim transcript needs two encodings", {})
        scores = [decode_virtual_payload(m.bits).value for m in messages[:2]]
        winner = select_winner(scores)
        if winner is None:
            return None, None
        return winner, decode_rational(messages[2].bits)
    if transcript.mode == FULL:
        return decode_support(messages[-1].bits)
    raise ProtocolError(f"Unknown transcript mode {transcript.mode!r}", {})


def disj_oracle(d: DisjInput) -> bool:
    """True iff no index has ``x_k = y_k = 1``."""
    return not any(a and b for a, b in zip(d.x, d.y))


def disj_via_auction(d: DisjInput, certify: bool = False) -> bool:
    """DISJ answer read off Bidder One winning at the lowest profile."""
    inst, _ = build_instance(d)
    return select_outcome(inst, LOWEST, LOWEST, backend="flow", certify=certify) == frozenset({1})


def bits_per_party(transcript: Transcript) -> dict[str, int]:
    return {name: transcript.bits_by(name) for name in transcript.senders()}


def protocol_bits(dists: Sequence[SingleDimDistribution], values: Sequence[int]) -> Transcript:
    """Transcript of one single-dim run (synchronous helper for sweeps)."""
    return asyncio.run(run_singledim_protocol(dists[0], values[0], dists[1], values[1])).transcript
