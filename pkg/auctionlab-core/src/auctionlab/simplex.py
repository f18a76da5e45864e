"""Exact two-phase simplex over Fractions with Bland's anti-cycling rule.

The tableau is sparse: each row is a ``dict`` from column index to a nonzero
Fraction. Columns are ordered so that Bland's rule (lowest entering index,
lowest leaving basic index on ratio ties) is deterministic.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal
import logging

from .errors import InfeasibleError, LPError, UnboundedError
from .numerics import render_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)

Relation = Literal["<=", "="]
Row = dict[int, Fraction]


@dataclass
class Constraint:
    coeffs: dict[str, Fraction]
    relation: Relation
    rhs: Fraction
    name: str = ""


@dataclass
class LinearProgram:
    """``max objective . x`` over named variables, ``x >= 0`` unless free."""

    variables: list[str] = field(default_factory=list)
    objective: dict[str, Fraction] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    free: set[str] = field(default_factory=set)
    fixed: dict[str, Fraction] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index = {v: i for i, v in enumerate(self.variables)}

    def add_variable(self, name: str, cost=ZERO, free: bool = False) -> str:
        if name in self._index:
            raise LPError(f"Duplicate LP variable {name!r}", {"variable": name})
        self._index[name] = len(self.variables)
        self.variables.append(name)
        if cost:
            self.objective[name] = Fraction(cost)
        if free:
            self.free.add(name)
        return name

    def add_constraint(self, coeffs: dict[str, Fraction], relation: Relation, rhs, name: str = "") -> None:
        unknown = [v for v in coeffs if v not in self._index]
        if unknown:
            raise LPError(f"Constraint {name!r} uses unknown variables {unknown}", {"name": name})
        cleaned = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self.constraints.append(Constraint(cleaned, relation, Fraction(rhs), name))


@dataclass(frozen=True)
class LPSolution:
    value: Fraction
    assignment: dict[str, Fraction]
    pivots: int


# ============ Presolve ============


def presolve(lp: LinearProgram) -> LinearProgram:
    """Fix at zero every nonnegative column with no objective weight that only
    appears with nonnegative coefficients in ``<=`` rows, then drop empty rows."""
    appearances: dict[str, list[tuple[Relation, Fraction]]] = {v: [] for v in lp.variables}
    for con in lp.constraints:
        for v, c in con.coeffs.items():
            appearances[v].append((con.relation, c))
    fixed = {
        v: ZERO
        for v in lp.variables
        if v not in lp.free
        and not lp.objective.get(v)
        and all(rel == "<=" and c >= 0 for rel, c in appearances[v])
    }
    reduced = LinearProgram(fixed={**lp.fixed, **fixed})
    for v in lp.variables:
        if v not in fixed:
            reduced.add_variable(v, lp.objective.get(v, ZERO), v in lp.free)
    dropped = 0
    for con in lp.constraints:
        coeffs = {v: c for v, c in con.coeffs.items() if v not in fixed}
        if not coeffs:
            if (con.relation == "<=" and con.rhs < 0) or (con.relation == "=" and con.rhs != 0):
                raise InfeasibleError(f"Constraint {con.name!r} is infeasible after presolve", {})
            dropped += 1
            continue
        reduced.add_constraint(coeffs, con.relation, con.rhs, con.name)
    logger.debug("presolve fixed %d columns, dropped %d rows", len(fixed), dropped)
    return reduced


# ============ Tableau ============


class _Tableau:
    def __init__(self, rows: list[Row], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.cost: Row = {}
        self.value = ZERO
        self.pivots = 0

    def set_objective(self, c: dict[int, Fraction]) -> None:
        """Reduced costs ``c_j - c_B B^-1 A_j`` for the current basis."""
        cost = dict(c)
        value = ZERO
        for row, rhs, b in zip(self.rows, self.rhs, self.basis):
            weight = c.get(b, ZERO)
            if not weight:
                continue
            value += weight * rhs
            for j, a in row.items():
                cost[j] = cost.get(j, ZERO) - weight * a
        self.cost = {j: v for j, v in cost.items() if v != 0}
        self.value = value

    def pivot(self, r: int, col: int) -> None:
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            row = {j: a / piv for j, a in row.items()}
            self.rows[r] = row
            self.rhs[r] /= piv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            factor = other.get(col)
            if factor is None:
                continue
            for j, a in row.items():
                updated = other.get(j, ZERO) - factor * a
                if updated:
                    other[j] = updated
                else:
                    other.pop(j, None)
            self.rhs[i] -= factor * self.rhs[r]
        factor = self.cost.get(col)
        if factor is not None:
            for j, a in row.items():
                updated = self.cost.get(j, ZERO) - factor * a
                if updated:
                    self.cost[j] = updated
                else:
                    self.cost.pop(j, None)
            self.value += factor * self.rhs[r]
        self.basis[r] = col
        self.pivots += 1

    def optimize(self) -> None:
        """Bland's rule to optimality; raise UnboundedError on a free ray."""
        while True:
            entering = min(
                (j for j, d in self.cost.items() if d > 0),
                default=None,
            )
            if entering is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                key = (self.rhs[i] / a, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                raise UnboundedError("Objective is unbounded", {"column": entering})
            self.pivot(best[1], entering)


def solve_exact(lp: LinearProgram) -> LPSolution:
    """Exact optimum and one optimal vertex of ``lp``."""
    columns: list[tuple[str, int]] = []
    for v in lp.variables:
        columns.append((v, 1))
        if v in lp.free:
            columns.append((v, -1))
    col_of = {(v, s): j for j, (v, s) in enumerate(columns)}
    n_struct = len(columns)

    rows: list[Row] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    artificial: set[int] = set()
    next_col = n_struct
    for con in lp.constraints:
        row: Row = {}
        for v, c in con.coeffs.items():
            row[col_of[(v, 1)]] = c
            if v in lp.free:
                row[col_of[(v, -1)]] = -c
        b = con.rhs
        slack_sign = 1
        if b < 0:
            row = {j: -a for j, a in row.items()}
            b = -b
            slack_sign = -1
        if con.relation == "<=":
            row[next_col] = Fraction(slack_sign)
            slack = next_col
            next_col += 1
            if slack_sign > 0:
                rows.append(row)
                rhs.append(b)
                basis.append(slack)
                continue
        row[next_col] = Fraction(1)
        artificial.add(next_col)
        rows.append(row)
        rhs.append(b)
        basis.append(next_col)
        next_col += 1

    tableau = _Tableau(rows, rhs, basis)
    if artificial:
        tableau.set_objective({j: Fraction(-1) for j in artificial})
        tableau.optimize()
        if tableau.value < 0:
            raise InfeasibleError("Linear program is infeasible", {"phase1": render_rational(tableau.value)})
        _drive_out(tableau, artificial)

    costs: dict[int, Fraction] = {}
    for v, c in lp.objective.items():
        costs[col_of[(v, 1)]] = c
        if v in lp.free:
            costs[col_of[(v, -1)]] = -c
    tableau.set_objective(costs)
    tableau.optimize()

    values = [ZERO] * next_col
    for b, r in zip(tableau.basis, tableau.rhs):
        values[b] = r
    assignment = dict(lp.fixed)
    for v in lp.variables:
        x = values[col_of[(v, 1)]]
        if v in lp.free:
            x -= values[col_of[(v, -1)]]
        assignment[v] = x
    logger.debug("simplex finished after %d pivots, value %s", tableau.pivots, tableau.value)
    return LPSolution(value=tableau.value, assignment=assignment, pivots=tableau.pivots)


def _drive_out(tableau: _Tableau, artificial: set[int]) -> None:
    """Pivot zero-level artificials out of the basis, drop redundant rows and
    erase the artificial columns."""
    keep = []
    for i in range(len(tableau.rows)):
        if tableau.basis[i] in artificial:
            col = min((j for j in tableau.rows[i] if j not in artificial), default=None)
            if col is None:
                continue
            tableau.pivot(i, col)
        keep.append(i)
    tableau.rows = [{j: a for j, a in tableau.rows[i].items() if j not in artificial} for i in keep]
    tableau.rhs = [tableau.rhs[i] for i in keep]
    tableau.basis = [tableau.basis[i] for i in keep]


# ============ Text dump ============


def dump_lp(lp: LinearProgram) -> str:
    """One line per objective/constraint/bound; rationals as ``p/q``."""

    def expr(coeffs: dict[str, Fraction]) -> str:
        terms = [f"{render_rational(c)} {v}" for v, c in coeffs.items()]
        return " + ".join(terms) if terms else "0"

    lines = [f"max: {expr({v: lp.objective[v] for v in lp.variables if v in lp.objective})}"]
    for con in lp.constraints:
        label = f"{con.name}: " if con.name else ""
        lines.append(f"{label}{expr(con.coeffs)} {con.relation} {render_rational(con.rhs)}")
    for v in lp.variables:
        lines.append(f"free: {v}" if v in lp.free else f"bound: {v} >= 0/1")
    for v, value in lp.fixed.items():
        lines.append(f"fixed: {v} = {render_rational(value)}")
    return "\n".join(lines) + "\n"
