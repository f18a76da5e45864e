"""Inputs handed to registered checks.

A CheckCase is one DISJ input at one size, with the derived instance, flows
and mechanisms computed lazily and shared by every check that runs on it.
"""

from dataclasses import dataclass, field
from functools import cached_property
from random import Random
from typing import TYPE_CHECKING, Any, Optional, Sequence
import math

import numpy as np

from ..duality import Flow, ModifiedFlow, VirtualValueTable, canonical_flow, modified_flow, virtual_values
from ..errors import UsageError
from ..mechanisms import Mechanism, spa_bidder1, spa_careful
from ..metrics import CheckMetrics, NullMetrics
from ..numerics import Instance
from ..reduction import DisjInput, ReductionTraces, build_instance, random_disj_input, render_bits, structured_inputs

if TYPE_CHECKING:
    from ..verification import VerificationConfig


@dataclass
class CheckCase:
    n: int
    disj: DisjInput
    label: str = ""

    @cached_property
    def _built(self) -> tuple[Instance, ReductionTraces]:
        return build_instance(self.disj)

    @property
    def instance(self) -> Instance:
        return self._built[0]

    @property
    def traces(self) -> ReductionTraces:
        return self._built[1]

    @cached_property
    def canonical(self) -> Flow:
        return canonical_flow(self.instance)

    @cached_property
    def canonical_vv(self) -> VirtualValueTable:
        return virtual_values(self.instance, self.canonical)

    @cached_property
    def spa1(self) -> Mechanism:
        return spa_bidder1(self.instance)

    @cached_property
    def modified(self) -> ModifiedFlow:
        return modified_flow(self.instance)

    @cached_property
    def careful(self) -> Optional[Mechanism]:
        k_star = self.modified.k_star
        if k_star is None:
            return None
        return spa_careful(self.instance, k_star)

    def describe(self) -> str:
        return f"n={self.n} {self.label} {self.disj}".replace("  ", " ")

    def to_task(self) -> tuple[int, str, str, str]:
        return self.n, render_bits(self.disj.x), render_bits(self.disj.y), self.label


def case_rng(seed: int, label: Any) -> Random:
    """Independent, reproducible stream per (seed, label)."""
    return Random(f"{seed}:{label}")


def cases_for(n: int, trials: int, seed: int) -> list[CheckCase]:
    """Structured inputs first, then ``trials`` seeded random pairs."""
    cases = []
    for index, d in enumerate(structured_inputs(n)):
        cases.append(CheckCase(n, d, f"structured#{index}"))
    rng = case_rng(seed, n)
    for trial in range(trials):
        cases.append(CheckCase(n, random_disj_input(n, rng), f"random#{trial}"))
    return cases


@dataclass
class SweepContext:
    """Everything a sweep check needs: the run configuration and N_min, plus where to record metrics."""

    config: "VerificationConfig"
    n_min: Optional[int] = None
    notes: dict[str, Any] = field(default_factory=dict)
    metrics: "CheckMetrics | NullMetrics" = field(default_factory=NullMetrics)

    def rng(self, label: str) -> Random:
        return case_rng(self.config.seed, label)


def scaling_fit(ns: Sequence[int], values: Sequence[Any]) -> float:
    """Slope of ``log(value)`` against ``log(n)`` by least squares."""
    if len(ns) != len(values) or len(ns) < 2:
        raise UsageError("scaling_fit needs at least two (n, value) pairs", {"n": list(ns)})
    xs = np.log(np.asarray([float(n) for n in ns]))
    ys = np.log(np.asarray([float(v) for v in values]))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def log2(n: int) -> float:
    return math.log2(n)
