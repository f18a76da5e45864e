"""Certificate reports: per-condition pass/fail diagnostics with exact sides."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional


@dataclass(frozen=True)
class CheckResult:
    """One evaluated condition."""

    condition: str
    location: str
    lhs: Optional[Fraction]
    rhs: Optional[Fraction]
    passed: bool
    relation: str = ""

    def describe(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        if self.lhs is None:
            return f"[{verdict}] {self.condition} @ {self.location}"
        rhs = "" if self.rhs is None else f" {self.rhs}"
        return (
            f"[{verdict}] {self.condition} @ {self.location}: "
            f"{self.lhs} {self.relation}{rhs}"
        )


@dataclass(frozen=True)
class CertificateReport:
    """Ordered condition results; ``passed`` iff every check passed."""

    checks: tuple[CheckResult, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def by_condition(self, condition: str) -> list[CheckResult]:
        return [c for c in self.checks if c.condition == condition]

    def failed_conditions(self) -> set[str]:
        return {c.condition for c in self.checks if not c.passed}

    @staticmethod
    def merge(reports: Iterable["CertificateReport"]) -> "CertificateReport":
        merged: list[CheckResult] = []
        for report in reports:
            merged.extend(report.checks)
        return CertificateReport(tuple(merged))

    def __str__(self) -> str:
        head = "PASSED" if self.passed else f"FAILED ({len(self.failures)} violations)"
        return "\n".join([head] + [c.describe() for c in self.failures])


@dataclass
class ReportBuilder:
    """Accumulates checks; every comparison is exact."""

    checks: list[CheckResult] = field(default_factory=list)

    def _add(self, condition, location, lhs, rhs, passed, relation) -> bool:
        self.checks.append(
            CheckResult(
                condition=condition,
                location=location,
                lhs=None if lhs is None else Fraction(lhs),
                rhs=None if rhs is None else Fraction(rhs),
                passed=bool(passed),
                relation=relation,
            )
        )
        return bool(passed)

    def equal(self, condition: str, location: str, lhs, rhs) -> bool:
        return self._add(condition, location, lhs, rhs, lhs == rhs, "==")

    def less(self, condition: str, location: str, lhs, rhs) -> bool:
        return self._add(condition, location, lhs, rhs, lhs < rhs, "<")

    def less_equal(self, condition: str, location: str, lhs, rhs) -> bool:
        return self._add(condition, location, lhs, rhs, lhs <= rhs, "<=")

    def greater(self, condition: str, location: str, lhs, rhs) -> bool:
        return self._add(condition, location, lhs, rhs, lhs > rhs, ">")

    def greater_equal(self, condition: str, location: str, lhs, rhs) -> bool:
        return self._add(condition, location, lhs, rhs, lhs >= rhs, ">=")

    def within(self, condition: str, location: str, value, low, high) -> bool:
        ok = low <= value <= high
        self._add(condition, location, value, None, ok, f"in [{low}, {high}]")
        return ok

    def holds(self, condition: str, location: str, ok: bool) -> bool:
        return self._add(condition, location, None, None, ok, "")

    def extend(self, report: CertificateReport) -> None:
        self.checks.extend(report.checks)

    def build(self) -> CertificateReport:
        return CertificateReport(tuple(self.checks))
