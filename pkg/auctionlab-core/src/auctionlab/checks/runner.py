"""Per-case evaluation and the empirical N_min search."""

from dataclasses import dataclass
from functools import cache
from typing import Optional, Sequence
import logging
import time

from ..certificate import CertificateReport, ReportBuilder
from ..errors import AuctionLabError
from ..reduction import DisjInput, parse_bits, random_disj_input
from .context import CheckCase, SweepContext, case_rng
from .registry import CheckRegistry, check, default_registry, register_suite

logger = logging.getLogger(__name__)

N_MIN_CEILING = 32

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass(frozen=True)
class CaseRecord:
    """Outcome of one check on one case; ``detail`` names the first violation."""

    check: str
    n: int
    label: str
    status: str
    detail: str = ""
    duration: float = 0.0


def _first_failure(report: CertificateReport) -> str:
    failures = report.failures
    return failures[0].describe() if failures else ""


def evaluate_case(
    case: CheckCase,
    names: Sequence[str],
    n_min: Optional[int] = None,
    registry: CheckRegistry = default_registry,
) -> list[CaseRecord]:
    """Run the named case checks on ``case``; suites gated on N_min are skipped below it."""
    records = []
    for name in names:
        suite = registry.suite_of(name)
        if suite.min_n and n_min is not None and case.n < n_min:
            records.append(CaseRecord(name, case.n, case.label, SKIP))
            continue
        start = time.perf_counter()
        try:
            report = registry.get(name)(case)
        except (AuctionLabError, ArithmeticError) as exc:
            records.append(
                CaseRecord(name, case.n, case.label, FAIL, f"{type(exc).__name__}: {exc}",
                           time.perf_counter() - start)
            )
            continue
        duration = time.perf_counter() - start
        if report is None:
            records.append(CaseRecord(name, case.n, case.label, SKIP, duration=duration))
        elif report.passed:
            records.append(CaseRecord(name, case.n, case.label, PASS, duration=duration))
        else:
            records.append(
                CaseRecord(name, case.n, case.label, FAIL, f"{case.disj}: {_first_failure(report)}", duration)
            )
    return records


def evaluate_task(task: tuple[int, str, str, str, tuple[str, ...], Optional[int]]) -> list[CaseRecord]:
    """Picklable entry point for worker processes."""
    n, x, y, label, names, n_min = task
    case = CheckCase(n, DisjInput(parse_bits(x), parse_bits(y)), label)
    return evaluate_case(case, names, n_min)


def gated_checks(registry: CheckRegistry = default_registry) -> list[str]:
    """Case checks whose suites only hold from N_min on."""
    return [
        name
        for name in registry.list_checks(scope="case")
        if registry.suite_of(name).min_n
    ]


def _scan_cases(n: int, seed: int) -> list[CheckCase]:
    zeros, ones = (0,) * n, (1,) * n
    first = tuple(1 if i == 0 else 0 for i in range(n))
    last = tuple(1 if i == n - 1 else 0 for i in range(n))
    cases = [
        CheckCase(n, DisjInput(zeros, zeros), "zeros"),
        CheckCase(n, DisjInput(ones, ones), "ones"),
        CheckCase(n, DisjInput(ones, zeros), "ones/zeros"),
        CheckCase(n, DisjInput(first, first), "first"),
        CheckCase(n, DisjInput(last, last), "last"),
    ]
    rng = case_rng(seed, f"n_min:{n}")
    cases.append(CheckCase(n, random_disj_input(n, rng), "random"))
    return cases


def passes_at(n: int, seed: int = 0, registry: CheckRegistry = default_registry) -> bool:
    names = gated_checks(registry)
    for case in _scan_cases(n, seed):
        for record in evaluate_case(case, names, None, registry):
            if record.status == FAIL:
                logger.debug("n=%d fails %s: %s", n, record.check, record.detail)
                return False
    return True


@cache
def find_n_min(ceiling: int = N_MIN_CEILING, seed: int = 0) -> int:
    """Scan ``n`` downward from ``ceiling``; N_min is one above the largest failing ``n``.

    Returns ``ceiling + 1`` when the gated suites already fail at the ceiling.
    """
    for n in range(ceiling, 0, -1):
        if not passes_at(n, seed):
            logger.info("N_min = %d (largest failing n is %d)", n + 1, n)
            return n + 1
    logger.info("N_min = 1")
    return 1


register_suite("n_min", "N_min determination", order=80)


@check(suite="n_min", scope="sweep", claim="N_min is at most 32 and the gated suites pass at N_min, N_min + 1 and 32")
def n_min_bound(ctx: SweepContext) -> Optional[CertificateReport]:
    if ctx.n_min is None:
        return None
    ceiling = ctx.config.n_min_ceiling
    report = ReportBuilder()
    report.less_equal("n_min_bound", "N_min", ctx.n_min, ceiling)
    if ctx.n_min > ceiling:
        return report.build()
    names = gated_checks()
    for n in sorted({ctx.n_min, min(ctx.n_min + 1, ceiling), ceiling}):
        failed = [
            record
            for case in _scan_cases(n, ctx.config.seed)
            for record in evaluate_case(case, names, ctx.n_min)
            if record.status == FAIL
        ]
        report.holds("suite_passes", f"n={n}" + (f" {failed[0].detail}" if failed else ""), not failed)
    return report.build()
