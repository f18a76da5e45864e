"""Exception hierarchy for auctionlab.

Every error carries an optional ``context`` dict naming the offending bidder,
index or value so that CLI diagnostics and tests can inspect it directly.
"""

from typing import Any, Optional


class AuctionLabError(Exception):
    """Base exception for all auctionlab errors with context."""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        self.context = context or {}
        super().__init__(message)


class UsageError(AuctionLabError):
    """Command-line usage that argparse cannot catch on its own."""


class RationalFormatError(AuctionLabError, ValueError):
    """Text that is not a ``p/q`` rational."""


class BitsFormatError(AuctionLabError, ValueError):
    """Text that is not a ``0``/``1`` bit string."""


class TypeIndexError(AuctionLabError, IndexError):
    """Value or type index outside the bidder's range."""


# ============ Instances ============


class InstanceError(AuctionLabError):
    """Invalid instance data."""


class ProbabilitySumError(InstanceError):
    """A bidder's probability mass does not sum to exactly one."""


class ValueOrderError(InstanceError):
    """Values are not strictly increasing nonnegative integers."""


class NegativeProbabilityError(InstanceError):
    """A type carries negative probability."""


class ShapeError(InstanceError):
    """A table does not match the instance's dimensions."""


class LengthMismatchError(InstanceError):
    """A DISJ bit vector does not have the requested length."""


# ============ Flows ============


class FlowError(AuctionLabError):
    """Invalid Lagrangian multipliers."""


class BoostTooLargeError(FlowError):
    """Boost amount exceeds the available day-2 flow below the boost index."""


class FlowInvalidError(FlowError):
    """Multipliers fail the flow balance conditions."""


# ============ Mechanisms ============


class MechanismError(AuctionLabError):
    """Invalid mechanism or interim form."""


class NotMonotoneError(MechanismError):
    """Interim allocation decreases in value for some interest."""


class InfeasibleTieSplitError(MechanismError):
    """Careful tie split probability would fall outside [0, 1]."""


class InfeasibleMechanismError(MechanismError):
    """Ex-post allocation violates the feasibility constraints."""


# ============ Linear programs ============


class LPError(AuctionLabError):
    """Linear program failure."""


class InfeasibleError(LPError):
    """The linear program has no feasible point."""


class UnboundedError(LPError):
    """The linear program objective is unbounded."""


class BackendUnavailableError(LPError):
    """Requested select-outcome backend cannot serve this instance."""


# ============ Single-dimensional ============


class SingleDimError(AuctionLabError):
    """Invalid single-dimensional distribution or query."""


class ZeroMassError(SingleDimError):
    """A support point has zero probability."""


class ValueNotInSupportError(SingleDimError):
    """A reported value is not in the bidder's support."""


# ============ Protocols ============


class ProtocolError(AuctionLabError):
    """Malformed payload or protocol state."""


class ChannelClosedError(ProtocolError):
    """Send on, or receive from, a closed and drained channel."""


class DecodeError(ProtocolError):
    """Bit string ends early or holds an invalid code."""
