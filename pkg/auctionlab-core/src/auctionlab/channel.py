"""Async bit-string channels between two protocol parties.

Every payload that crosses a channel is appended to a shared Transcript, so
bit accounting is a by-product of communication rather than a separate step.
"""

from dataclasses import dataclass, field
from typing import Optional
import asyncio

from .errors import ChannelClosedError, ProtocolError


@dataclass(frozen=True)
class Message:
    sender: str
    bits: str

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class Transcript:
    """Ordered messages; ``total_bits`` is the sum of payload lengths."""

    mode: str = ""
    messages: list[Message] = field(default_factory=list)

    def record(self, sender: str, bits: str) -> None:
        self.messages.append(Message(sender, bits))

    @property
    def total_bits(self) -> int:
        return sum(len(m) for m in self.messages)

    def bits_by(self, sender: str) -> int:
        return sum(len(m) for m in self.messages if m.sender == sender)

    def senders(self) -> list[str]:
        return sorted({m.sender for m in self.messages})


class Channel:
    """One-directional async queue of bit strings.

    Example:
        ch = Channel()
        await ch.send("0110")
        bits = await ch.receive()
        ch.close()
    """

    def __init__(self, maxsize: int = 0):
        self._queue: asyncio.Queue[str] = asyncio.Queue(maxsize=maxsize)
        self._closed = False
        self._maxsize = maxsize

    @property
    def closed(self) -> bool:
        return self._closed

    async def send(self, bits: str) -> None:
        if self._closed:
            raise ChannelClosedError("Cannot send to closed channel")
        if any(ch not in "01" for ch in bits):
            raise ProtocolError("Payload must be a bit string", {"payload": bits[:32]})
        await self._queue.put(bits)

    async def receive(self, timeout: Optional[float] = None) -> str:
        """Next payload; raises ChannelClosedError on a closed, drained channel."""
        if self._closed and self._queue.empty():
            raise ChannelClosedError("Channel closed")
        if timeout is not None:
            return await asyncio.wait_for(self._queue.get(), timeout=timeout)
        return await self._queue.get()

    def close(self) -> None:
        self._closed = True

    def __len__(self) -> int:
        return self._queue.qsize()

    @property
    def empty(self) -> bool:
        return self._queue.empty()

    def __repr__(self) -> str:
        status = "closed" if self._closed else "open"
        return f"Channel({status}, size={len(self)}/{self._maxsize})"


class Endpoint:
    """A party's view of a duplex link: sends are recorded in the transcript."""

    def __init__(self, name: str, outbox: Channel, inbox: Channel, transcript: Transcript):
        self.name = name
        self._outbox = outbox
        self._inbox = inbox
        self._transcript = transcript

    async def send(self, bits: str) -> None:
        await self._outbox.send(bits)
        self._transcript.record(self.name, bits)

    async def receive(self, timeout: Optional[float] = None) -> str:
        return await self._inbox.receive(timeout)

    def close(self) -> None:
        self._outbox.close()


def duplex(transcript: Transcript, first: str = "alice", second: str = "bob") -> tuple[Endpoint, Endpoint]:
    """Two endpoints joined by a pair of channels."""
    forward, backward = Channel(), Channel()
    return (
        Endpoint(first, forward, backward, transcript),
        Endpoint(second, backward, forward, transcript),
    )
