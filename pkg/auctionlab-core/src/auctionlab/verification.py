"""The verification sweep behind ``auctionlab verify``.

Case checks run on every structured and seeded random DISJ input at every
configured size; sweep checks run once per configuration. Results are
aggregated in check order, then case order, whatever the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional
import logging
import os

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .checks import (
    FAIL,
    N_MIN_CEILING,
    PASS,
    SKIP,
    CaseRecord,
    SweepContext,
    cases_for,
    default_registry,
    evaluate_task,
    find_n_min,
    scaling_fit,
)
from .checks.registry import CheckRegistry
from .errors import AuctionLabError, UsageError
from .metrics import CheckMetrics, NullMetrics

logger = logging.getLogger(__name__)

SEED_ENV = "AUCTION_LAB_SEED"

__all__ = [
    "SEED_ENV",
    "CheckOutcome",
    "VerificationConfig",
    "VerificationResult",
    "find_n_min",
    "resolve_seed",
    "run_verification",
    "scaling_fit",
]


def resolve_seed(flag: Optional[int] = None) -> int:
    """``--seed`` if given, else ``$AUCTION_LAB_SEED``, else 0."""
    if flag is not None:
        return flag
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}", {"value": raw})


class VerificationConfig(BaseModel):
    """Sizes, trial counts and the check selection for one sweep."""

    model_config = ConfigDict(extra="forbid")

    n_values: list[int] = Field(default_factory=lambda: [8, 16, 24, 32])
    trials: int = Field(100, ge=1)
    seed: int = 0
    checks: list[str] = Field(default_factory=list)
    workers: int = Field(1, ge=1)
    n_min_ceiling: int = Field(N_MIN_CEILING, ge=1)
    disj_pairs: int = Field(1000, ge=0)
    single_dim_trials: int = Field(200, ge=0)
    protocol_draws: int = Field(1000, ge=0)
    locality_n_values: list[int] = Field(default_factory=lambda: [8, 64, 512])
    scaling_n_values: list[int] = Field(default_factory=lambda: [16, 32, 64])
    lp_n_values: list[int] = Field(default_factory=list)

    @field_validator("n_values", "locality_n_values", "scaling_n_values", "lp_n_values")
    @classmethod
    def _positive_sizes(cls, sizes: list[int]) -> list[int]:
        if any(n < 1 for n in sizes):
            raise ValueError(f"sizes must be positive, got {sizes}")
        return sizes


@dataclass
class CheckOutcome:
    """Aggregated result of one check over a sweep."""

    name: str
    suite: str
    claim: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_failure: Optional[str] = None

    @property
    def status(self) -> str:
        if self.failed:
            return FAIL
        if self.passed:
            return PASS
        return SKIP

    def add(self, status: str, where: str, detail: str) -> None:
        if status == PASS:
            self.passed += 1
        elif status == SKIP:
            self.skipped += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = f"{where}: {detail}".strip()


@dataclass
class VerificationResult:
    config: VerificationConfig
    outcomes: list[CheckOutcome]
    n_min: Optional[int] = None
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(o.status != FAIL for o in self.outcomes)

    def outcome(self, name: str) -> CheckOutcome:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise KeyError(name)


def _needs_n_min(names: list[str], registry: CheckRegistry) -> bool:
    return any(
        registry.suite_of(name).min_n or registry.info(name).suite == "n_min"
        or name == "lp_flow_agreement"
        for name in names
    )


def _run_case_checks(
    config: VerificationConfig,
    names: list[str],
    n_min: Optional[int],
    metrics,
) -> list[list[CaseRecord]]:
    tasks = []
    for n in config.n_values:
        for case in cases_for(n, config.trials, config.seed):
            n_, x, y, label = case.to_task()
            tasks.append((n_, x, y, label, tuple(names), n_min))
    logger.info("running %d case checks on %d cases", len(names), len(tasks))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(evaluate_task, tasks, chunksize=8))
    else:
        results = [evaluate_task(task) for task in tasks]
    for records in results:
        for record in records:
            metrics.record("check", record.check, record.duration, {"n": record.n})
    return results


def run_verification(
    config: VerificationConfig,
    metrics: Optional[CheckMetrics] = None,
    registry: CheckRegistry = default_registry,
) -> VerificationResult:
    """Run every selected check and aggregate pass/fail/skip counts.

    Case checks run over ``config.n_values`` (in worker processes when
    ``config.workers > 1``); sweep checks run once each. N_min is computed
    only when a selected check depends on it.

    Args:
        config: Sizes, seed, check selection and sweep parameters.
        metrics: Optional collector for timings and counters.
        registry: Check registry to select from.

    Returns:
        One outcome per selected check, N_min if computed, and sweep notes.

    Raises:
        UsageError: If a selected name is neither a check nor a suite.
    """
    metrics = metrics or NullMetrics()
    metrics.start_run()
    names = registry.select(config.checks)
    outcomes = {
        name: CheckOutcome(name, registry.info(name).suite, registry.info(name).claim)
        for name in names
    }

    n_min = None
    if _needs_n_min(names, registry):
        with metrics.measure("n_min", "find_n_min"):
            n_min = find_n_min(config.n_min_ceiling, config.seed)

    case_names = [n for n in names if registry.info(n).scope == "case"]
    if case_names:
        for records in _run_case_checks(config, case_names, n_min, metrics):
            for record in records:
                outcomes[record.check].add(record.status, f"n={record.n} {record.label}", record.detail)

    ctx = SweepContext(config=config, n_min=n_min, metrics=metrics)
    for name in names:
        if registry.info(name).scope != "sweep":
            continue
        logger.info("running sweep check %s", name)
        with metrics.measure("sweep", name):
            try:
                report = registry.get(name)(ctx)
            except AuctionLabError as exc:
                outcomes[name].add(FAIL, name, f"{type(exc).__name__}: {exc}")
                continue
        if report is None:
            outcomes[name].add(SKIP, name, "")
        elif report.passed:
            outcomes[name].add(PASS, name, "")
        else:
            outcomes[name].add(FAIL, name, report.failures[0].describe())

    metrics.end_run()
    result = VerificationResult(
        config=config,
        outcomes=[outcomes[name] for name in names],
        n_min=n_min,
        notes=ctx.notes,
    )
    logger.info("verification %s", "passed" if result.passed else "FAILED")
    return result
