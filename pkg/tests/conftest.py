"""Shared fixtures for the auctionlab test suite."""

from fractions import Fraction

import pytest

from auctionlab import DisjInput, build_instance, make_bidder, make_instance
from auctionlab.checks import find_n_min

# Large enough for every claim about reduction instances to hold.
LARGE_N = 32


@pytest.fixture
def small_input():
    """The n = 2 input whose recurrences are worked out by hand in the tests."""
    return DisjInput((1, 0), (1, 0))


@pytest.fixture
def small_instance(small_input):
    inst, traces = build_instance(small_input)
    return inst, traces


@pytest.fixture
def disjoint_large():
    x = tuple(k % 2 for k in range(LARGE_N))
    y = tuple(1 - b for b in x)
    return DisjInput(x, y)


@pytest.fixture
def intersecting_large():
    x = tuple(1 if k in (3, 17) else 0 for k in range(LARGE_N))
    y = tuple(1 if k in (3, 17, 20) else 0 for k in range(LARGE_N))
    return DisjInput(x, y)


@pytest.fixture
def two_level_instance():
    """Values (5, 6), uniform day-1 mass for both bidders."""
    half = Fraction(1, 2)
    bidder = make_bidder([5, 6], [half, half], [0, 0])
    return make_instance(bidder, bidder)


@pytest.fixture(scope="session")
def n_min():
    return find_n_min()
