"""Timing and counters for verification runs.

Check durations are recorded per check name and per instance size, and
checks may add counters of their own (LP pivots, solves), so ``verify
--metrics`` can show where a sweep spends its time. Nothing here feeds into
any certificate.
"""

import time
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, Optional

RULE = "-" * 72
BANNER = "=" * 72
KINDS = ("n_min", "check", "sweep", "lp")


@dataclass(frozen=True)
class OperationMetric:
    """One timed operation; ``n`` is the instance size when it has one."""

    operation_type: str  # one of KINDS
    name: str
    duration: float  # seconds
    n: Optional[int] = None


@dataclass
class AggregatedMetrics:
    count: int = 0
    total_time: float = 0.0
    max_time: float = 0.0

    @property
    def avg_time(self) -> float:
        return self.total_time / self.count if self.count else 0.0


def _section(title: str, rows: list[str]) -> list[str]:
    return [RULE, title, RULE, *rows, ""]


class CheckMetrics:
    """Collects check timings and counters for one verification run.

    Usage:
        metrics = CheckMetrics()
        result = run_verification(config, metrics=metrics)
        print(metrics.get_report())
    """

    def __init__(self):
        self.operations: list[OperationMetric] = []
        self.counters: defaultdict[str, Counter] = defaultdict(Counter)
        self._started: Optional[float] = None
        self._finished: Optional[float] = None

    def start_run(self):
        self._started = time.perf_counter()

    def end_run(self):
        self._finished = time.perf_counter()

    def record(
        self,
        operation_type: str,
        name: str,
        duration: float,
        metadata: Optional[dict[str, Any]] = None,
    ):
        """Record one timed operation.

        Args:
            operation_type: Category the report groups by ("check", "sweep", ...).
            name: Check or step name.
            duration: Seconds, possibly measured in a worker process.
            metadata: Only the ``n`` key is kept.
        """
        n = (metadata or {}).get("n")
        self.operations.append(OperationMetric(operation_type, name, duration, n))

    @contextmanager
    def measure(
        self, operation_type: str, name: str, metadata: Optional[dict[str, Any]] = None
    ) -> Iterator[None]:
        """Time a block; the duration is recorded even if the block raises.

        Usage:
            with metrics.measure("lp", "solve", {"n": 11}):
                solved = solve_instance(inst, constraints="local")
        """
        began = time.perf_counter()
        try:
            yield
        finally:
            self.record(operation_type, name, time.perf_counter() - began, metadata)

    def count(self, name: str, amount: int = 1, n: Optional[int] = None):
        """Add ``amount`` to a named counter, optionally keyed by instance size."""
        self.counters[name][n] += amount

    def get_total_time(self) -> float:
        if self._started is None or self._finished is None:
            return 0.0
        return self._finished - self._started

    def get_aggregated(self, operation_type: str) -> dict[str, AggregatedMetrics]:
        out: dict[str, AggregatedMetrics] = {}
        for op in self.operations:
            if op.operation_type != operation_type:
                continue
            agg = out.setdefault(op.name, AggregatedMetrics())
            agg.count += 1
            agg.total_time += op.duration
            agg.max_time = max(agg.max_time, op.duration)
        return out

    def cases_by_n(self) -> dict[int, int]:
        """Case-check evaluations per instance size."""
        sizes = Counter(op.n for op in self.operations if op.operation_type == "check" and op.n is not None)
        return dict(sorted(sizes.items()))

    def get_report(self) -> str:
        lines = [BANNER, "AUCTIONLAB VERIFICATION METRICS REPORT", BANNER, ""]
        lines += [
            f"Total Run Time: {self.get_total_time():.6f} seconds",
            f"Total Operations: {len(self.operations)}",
            "",
        ]

        for kind in KINDS:
            aggregated = self.get_aggregated(kind)
            if not aggregated:
                continue
            rows = [f"{'Name':<30} {'Count':>8} {'Total(s)':>10} {'Avg(s)':>10} {'Max(s)':>10}"]
            for name, m in sorted(aggregated.items(), key=lambda item: -item[1].total_time):
                rows.append(
                    f"{name:<30} {m.count:>8} {m.total_time:>10.4f} {m.avg_time:>10.4f} {m.max_time:>10.4f}"
                )
            lines += _section(f"{kind.upper().replace('_', ' ')} METRICS", rows)

        cases = self.cases_by_n()
        if cases:
            lines += _section("CASE CHECKS PER N", [f"n={n:<28} {total:>8}" for n, total in cases.items()])

        if self.counters:
            rows = []
            for name in sorted(self.counters):
                by_n = self.counters[name]
                for n in sorted(by_n, key=lambda k: (k is None, k or 0)):
                    label = name if n is None else f"{name} n={n}"
                    rows.append(f"{label:<30} {by_n[n]:>8}")
            lines += _section("COUNTERS", rows)

        lines.append(BANNER)
        return "\n".join(lines)

    def get_summary(self) -> str:
        kinds = Counter(op.operation_type for op in self.operations)
        parts = [f"Total: {self.get_total_time():.4f}s", f"Ops: {len(self.operations)}"]
        if kinds:
            parts.append("(" + ", ".join(f"{k}: {c}" for k, c in sorted(kinds.items())) + ")")
        return " | ".join(parts)


class NullMetrics(CheckMetrics):
    """Collector that drops everything; the default when no metrics are asked for."""

    def start_run(self):
        pass

    def end_run(self):
        pass

    def record(self, operation_type, name, duration, metadata=None):
        pass

    def count(self, name, amount=1, n=None):
        pass

    def get_report(self) -> str:
        return "Metrics collection disabled"

    def get_summary(self) -> str:
        return "Metrics disabled"
