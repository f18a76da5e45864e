from dataclasses import dataclass, field
from typing import Callable, Literal, Optional
import inspect

from ..errors import UsageError

Scope = Literal["case", "sweep"]


@dataclass
class SuiteInfo:
    """Metadata for a group of checks."""

    id: str
    label: str
    order: int = field(default=100)  # display order in the reference
    min_n: bool = False  # cases below N_min are skipped
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "order": self.order,
            "min_n": self.min_n,
            "description": self.description,
        }


@dataclass
class CheckInfo:
    """Metadata for one registered check."""

    name: str
    suite: str
    claim: str
    scope: Scope = "case"
    description: str = ""


class CheckRegistry:
    """Registry for verification checks with registration via decorator."""

    def __init__(self):
        self.checks: dict[str, Callable] = {}
        self.infos: dict[str, CheckInfo] = {}
        self.suites: dict[str, SuiteInfo] = {}

    def register_suite(
        self,
        id: str,
        label: str,
        order: int = 100,
        min_n: bool = False,
        description: str = "",
    ) -> SuiteInfo:
        info = SuiteInfo(id, label, order, min_n, description)
        self.suites[id] = info
        return info

    def register(
        self,
        name: Optional[str] = None,
        *,
        suite: str,
        claim: str,
        scope: Scope = "case",
        description: str = "",
    ):
        """
        Decorator to register a check.

        Usage:
            @registry.register(suite="reduction", claim="masses sum to 1/2, 1/2, 1")
            def probability_mass(case: CheckCase) -> CertificateReport:
                ...

        Case checks take a CheckCase and sweep checks a SweepContext; both
        return a CertificateReport, or None when the input is out of scope.
        """

        def decorator(func: Callable) -> Callable:
            check_name = name if name else func.__name__
            if suite not in self.suites:
                raise UsageError(f"Unknown suite {suite!r} for check {check_name!r}", {})
            if check_name in self.checks:
                raise UsageError(f"Check {check_name!r} registered twice", {})
            if len(inspect.signature(func).parameters) != 1:
                raise UsageError(f"Check {check_name!r} must take exactly one argument", {})
            doc = inspect.getdoc(func) or ""
            self.checks[check_name] = func
            self.infos[check_name] = CheckInfo(
                name=check_name,
                suite=suite,
                claim=claim,
                scope=scope,
                description=description or doc.split("\n\n")[0],
            )
            return func

        return decorator

    def get(self, name: str) -> Callable:
        if name not in self.checks:
            raise UsageError(f"Unknown check {name!r}", {"check": name})
        return self.checks[name]

    def info(self, name: str) -> CheckInfo:
        self.get(name)
        return self.infos[name]

    def suite_of(self, name: str) -> SuiteInfo:
        return self.suites[self.info(name).suite]

    def list_checks(self, suite: Optional[str] = None, scope: Optional[Scope] = None) -> list[str]:
        """Check names ordered by suite order, then registration order."""
        order = {s: info.order for s, info in self.suites.items()}
        names = [
            n
            for n, info in self.infos.items()
            if (suite is None or info.suite == suite) and (scope is None or info.scope == scope)
        ]
        position = {n: i for i, n in enumerate(self.infos)}
        return sorted(names, key=lambda n: (order[self.infos[n].suite], position[n]))

    def select(self, names: Optional[list[str]] = None) -> list[str]:
        """Expand suite ids and check names into an ordered check list (empty = all)."""
        if not names:
            return self.list_checks()
        chosen: set[str] = set()
        for name in names:
            if name in self.suites:
                chosen.update(self.list_checks(suite=name))
            elif name in self.checks:
                chosen.add(name)
            else:
                raise UsageError(
                    f"Unknown check or suite {name!r}",
                    {"name": name, "known": sorted([*self.suites, *self.checks])},
                )
        return [n for n in self.list_checks() if n in chosen]


default_registry = CheckRegistry()


def check(
    name: Optional[str] = None,
    *,
    suite: str,
    claim: str,
    scope: Scope = "case",
    description: str = "",
):
    """Register a check to the default global registry."""
    return default_registry.register(
        name, suite=suite, claim=claim, scope=scope, description=description
    )


def register_suite(
    id: str, label: str, order: int = 200, min_n: bool = False, description: str = ""
) -> SuiteInfo:
    return default_registry.register_suite(id, label, order, min_n, description)
