"""Tests for the exception hierarchy."""

import pytest

from auctionlab import AuctionLabError
from auctionlab.errors import (
    BitsFormatError,
    BoostTooLargeError,
    ChannelClosedError,
    FlowError,
    InstanceError,
    ProbabilitySumError,
    ProtocolError,
    RationalFormatError,
    TypeIndexError,
    UsageError,
)


def test_context_defaults_to_empty():
    assert AuctionLabError("plain").context == {}
    assert UsageError("bad", {"flag": "--n"}).context == {"flag": "--n"}


@pytest.mark.parametrize(
    "error, parent",
    [
        (ProbabilitySumError, InstanceError),
        (BoostTooLargeError, FlowError),
        (ChannelClosedError, ProtocolError),
        (RationalFormatError, ValueError),
        (BitsFormatError, ValueError),
        (TypeIndexError, IndexError),
    ],
)
def test_hierarchy(error, parent):
    assert issubclass(error, parent)
    assert issubclass(error, AuctionLabError)


def test_message_is_str():
    assert str(ProbabilitySumError("sum is 3/4", {"total": "3/4"})) == "sum is 3/4"
