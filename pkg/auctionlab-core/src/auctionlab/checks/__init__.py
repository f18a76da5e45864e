"""Verification checks, registered by suite.

Importing this package registers every built-in check on ``default_registry``.
"""

from .registry import CheckInfo, CheckRegistry, SuiteInfo, check, default_registry, register_suite
from .context import CheckCase, SweepContext, case_rng, cases_for, scaling_fit
from . import suites  # noqa: F401  (registers the built-in checks)
from .runner import (
    FAIL,
    N_MIN_CEILING,
    PASS,
    SKIP,
    CaseRecord,
    evaluate_case,
    evaluate_task,
    find_n_min,
    gated_checks,
    passes_at,
)

__all__ = [
    "CheckInfo",
    "CheckRegistry",
    "SuiteInfo",
    "check",
    "default_registry",
    "register_suite",
    "CheckCase",
    "SweepContext",
    "case_rng",
    "cases_for",
    "scaling_fit",
    "FAIL",
    "N_MIN_CEILING",
    "PASS",
    "SKIP",
    "CaseRecord",
    "evaluate_case",
    "evaluate_task",
    "find_n_min",
    "gated_checks",
    "passes_at",
]
