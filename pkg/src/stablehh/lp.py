"""Linear programs over bounded variables, with two interchangeable backends.

The in-tree reference backend is a dense two-phase primal simplex for
problems with general variable bounds.  It is fully deterministic:
Dantzig pricing with a fixed tie rule, falling back to Bland's rule
after a run of degenerate pivots so cycling cannot occur.  Power-of-two
row/column equilibration is applied before the solve and undone exactly
afterwards, so scaling never perturbs the answer.

``scipy``'s HiGHS solver can be selected for large programs.  Both
backends honor the same contract: on ``optimal`` status all constraints
hold within the feasibility tolerance after row scaling, and two solves
of the same program return identical results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, SolverFailureError

DEFAULT_FEAS_TOL = 1e-7
DEFAULT_OPT_TOL = 1e-9

LESS_EQUAL = "<="
EQUAL = "="
GREATER_EQUAL = ">="
_SENSES = (LESS_EQUAL, EQUAL, GREATER_EQUAL)

# nonbasic/basic status codes used by the simplex
_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2
_FREE = 3


def feasibility_tolerance() -> float:
    """Feasibility tolerance, overridable through the STABLEHH_TOL env var."""
    raw = os.environ.get("STABLEHH_TOL")
    if raw is None:
        return DEFAULT_FEAS_TOL
    try:
        return float(raw)
    except ValueError as exc:
        raise InvalidInputError(f"STABLEHH_TOL must be a float, got {raw!r}") from exc


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[float, str], ...]
    sense: str
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[float, str], ...] = ()
    direction: str = "min"

    def validate(self) -> None:
        names = set()
        for var in self.variables:
            if var.name in names:
                raise InvalidInputError(f"duplicate variable {var.name!r}")
            names.add(var.name)
            if math.isnan(var.lower) or math.isnan(var.upper) or var.lower > var.upper:
                raise InvalidInputError(f"bad bounds on {var.name!r}: [{var.lower}, {var.upper}]")
        for row in self.constraints:
            if row.sense not in _SENSES:
                raise InvalidInputError(f"constraint {row.name!r} has sense {row.sense!r}")
            if not math.isfinite(row.rhs):
                raise InvalidInputError(f"constraint {row.name!r} has non-finite rhs")
            for coeff, var in row.terms:
                if var not in names:
                    raise InvalidInputError(f"constraint {row.name!r} references unknown variable {var!r}")
                if not math.isfinite(coeff):
                    raise InvalidInputError(f"constraint {row.name!r} has non-finite coefficient on {var!r}")
        if self.direction not in ("min", "max"):
            raise InvalidInputError(f"direction must be min or max, got {self.direction!r}")
        for coeff, var in self.objective:
            if var not in names:
                raise InvalidInputError(f"objective references unknown variable {var!r}")
            if not math.isfinite(coeff):
                raise InvalidInputError(f"objective has non-finite coefficient on {var!r}")

    def constraint_map(self) -> dict[str, Constraint]:
        return {row.name: row for row in self.constraints}

    def variable_map(self) -> dict[str, Variable]:
        return {var.name: var for var in self.variables}


@dataclass(frozen=True)
class Solution:
    status: str  # optimal | infeasible | unbounded
    values: Mapping[str, float]
    objective_value: float
    max_residual: float
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class LPBuilder:
    """Incremental construction of a :class:`LinearProgram`."""

    def __init__(self) -> None:
        self._variables: dict[str, tuple[float, float]] = {}
        self._constraints: list[Constraint] = []
        self._row_names: set[str] = set()

    def add_variable(self, name: str, lower: float = 0.0, upper: float = math.inf) -> str:
        if name in self._variables:
            raise InvalidInputError(f"duplicate variable {name!r}")
        self._variables[name] = (lower, upper)
        return name

    def has_variable(self, name: str) -> bool:
        return name in self._variables

    def add_constraint(self, name: str, terms: Iterable[tuple[float, str]], sense: str, rhs: float) -> str:
        if name in self._row_names:
            raise InvalidInputError(f"duplicate constraint {name!r}")
        self._row_names.add(name)
        cleaned = tuple((float(c), v) for c, v in terms if c != 0.0)
        self._constraints.append(Constraint(name, cleaned, sense, float(rhs)))
        return name

    def build(self, objective: Iterable[tuple[float, str]] = (), direction: str = "min") -> LinearProgram:
        program = LinearProgram(
            variables=tuple(Variable(n, lo, hi) for n, (lo, hi) in self._variables.items()),
            constraints=tuple(self._constraints),
            objective=tuple((float(c), v) for c, v in objective if c != 0.0),
            direction=direction,
        )
        program.validate()
        return program


# ---------------------------------------------------------------------------
# Feasibility checking
# ---------------------------------------------------------------------------


def check_feasibility(lp: LinearProgram, values: Mapping[str, float], scaled: bool = False) -> float:
    """Largest signed violation of ``values`` over all rows and bounds.

    Negative means slack everywhere; 0 on the (empty) boundary; positive
    means infeasible by that amount.  With ``scaled=True`` each row's
    violation is divided by the max-abs of its coefficients and rhs,
    which is the residual convention used for solver acceptance.
    """
    worst = 0.0 if not lp.constraints and not lp.variables else -math.inf
    for var in lp.variables:
        if var.name not in values:
            raise InvalidInputError(f"no value supplied for variable {var.name!r}")
        x = values[var.name]
        denom = 1.0
        if scaled:
            finite = [abs(b) for b in (var.lower, var.upper) if math.isfinite(b)]
            denom = max([1.0] + finite)
        if math.isfinite(var.lower):
            worst = max(worst, (var.lower - x) / denom)
        if math.isfinite(var.upper):
            worst = max(worst, (x - var.upper) / denom)
    for row in lp.constraints:
        lhs = sum(coeff * values[var] for coeff, var in row.terms)
        denom = max([1.0] + [abs(c) for c, _ in row.terms] + [abs(row.rhs)]) if scaled else 1.0
        if row.sense == LESS_EQUAL:
            violation = lhs - row.rhs
        elif row.sense == GREATER_EQUAL:
            violation = row.rhs - lhs
        else:
            violation = abs(lhs - row.rhs)
        worst = max(worst, violation / denom)
    return worst if math.isfinite(worst) else 0.0


# ---------------------------------------------------------------------------
# Array form and equilibration
# ---------------------------------------------------------------------------


def _to_arrays(lp: LinearProgram):
    names = [v.name for v in lp.variables]
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    m = len(lp.constraints)
    A = np.zeros((m, n))
    b = np.zeros(m)
    senses = []
    for i, row in enumerate(lp.constraints):
        for coeff, var in row.terms:
            A[i, index[var]] += coeff
        b[i] = row.rhs
        senses.append(row.sense)
    lower = np.array([v.lower for v in lp.variables], dtype=float)
    upper = np.array([v.upper for v in lp.variables], dtype=float)
    c = np.zeros(n)
    for coeff, var in lp.objective:
        c[index[var]] += coeff
    if lp.direction == "max":
        c = -c
    return names, A, b, senses, c, lower, upper


def _pow2_scale(values: np.ndarray) -> np.ndarray:
    """Power-of-two scale factors bringing each entry's magnitude near one."""
    scale = np.ones_like(values)
    positive = values > 0
    scale[positive] = np.exp2(-np.round(np.log2(values[positive])))
    return scale


def _equilibrate(A: np.ndarray, b: np.ndarray, lower, upper, c):
    m, n = A.shape
    row_scale = _pow2_scale(np.abs(A).max(axis=1) if n else np.zeros(m))
    A = A * row_scale[:, None]
    b = b * row_scale
    col_scale = _pow2_scale(np.abs(A).max(axis=0) if m else np.zeros(n))
    A = A * col_scale[None, :]
    # x = col_scale * x'; bounds and objective follow the substitution
    lower = lower / col_scale
    upper = upper / col_scale
    c = c * col_scale
    return A, b, lower, upper, c, row_scale, col_scale


# ---------------------------------------------------------------------------
# Reference backend: two-phase bounded-variable primal simplex
# ---------------------------------------------------------------------------

_PIVOT_TOL = 1e-10
_DEGENERATE_STEP = 1e-11
_BLAND_TRIGGER = 64
_REFACTOR_EVERY = 200


class _Simplex:
    def __init__(self, A, b, c, lower, upper, tol_feas, tol_opt):
        m, n = A.shape
        self.m = m
        self.n_struct = n
        # slack per inequality row, artificial per row
        slack_cols = np.zeros((m, m))
        slack_lower = np.zeros(m)
        slack_upper = np.zeros(m)
        self.b = b.astype(float).copy()
        for i in range(m):
            slack_cols[i, i] = 1.0
        self.A = np.hstack([A, slack_cols, np.zeros((m, m))])
        self.lower = np.concatenate([lower, slack_lower, np.zeros(m)])
        self.upper = np.concatenate([upper, slack_upper, np.full(m, math.inf)])
        self.c = np.concatenate([c, np.zeros(2 * m)])
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        self.iterations = 0

    def configure_senses(self, senses: Sequence[str]) -> None:
        n = self.n_struct
        for i, sense in enumerate(senses):
            j = n + i
            if sense == LESS_EQUAL:
                self.lower[j], self.upper[j] = 0.0, math.inf
            elif sense == GREATER_EQUAL:
                self.lower[j], self.upper[j] = -math.inf, 0.0
            else:
                self.lower[j], self.upper[j] = 0.0, 0.0

    def initial_point(self) -> np.ndarray:
        """Nonbasic start: every variable at its finite bound nearest zero."""
        total = self.A.shape[1]
        val = np.zeros(total)
        self.status = np.full(total, _FREE, dtype=int)
        for j in range(total):
            lo, hi = self.lower[j], self.upper[j]
            if math.isfinite(lo) and (not math.isfinite(hi) or abs(lo) <= abs(hi)):
                val[j] = lo
                self.status[j] = _AT_LOWER
            elif math.isfinite(hi):
                val[j] = hi
                self.status[j] = _AT_UPPER
            else:
                val[j] = 0.0
                self.status[j] = _FREE
        return val

    def solve(self, senses: Sequence[str], max_iter: int | None = None):
        m = self.m
        n = self.n_struct
        self.configure_senses(senses)
        val = self.initial_point()

        # artificial columns absorb the initial residual with positive sign
        residual = self.b - self.A[:, : n + m] @ val[: n + m]
        art = np.arange(n + m, n + 2 * m)
        for i in range(m):
            self.A[i, art[i]] = 1.0 if residual[i] >= 0 else -1.0
        val[art] = np.abs(residual)
        self.status[art] = _BASIC
        basis = list(art)
        Binv = np.diag(np.sign(np.where(residual == 0, 1.0, residual)))
        xB = np.abs(residual).copy()

        if max_iter is None:
            max_iter = 200 * (m + n) + 1000

        phase1_cost = np.zeros(self.A.shape[1])
        phase1_cost[art] = 1.0
        basis, Binv, xB, val, outcome = self._iterate(phase1_cost, basis, Binv, xB, val, max_iter, phase=1)
        if outcome == "iteration_limit":
            raise SolverFailureError("phase-1 iteration limit reached")
        art_set = {int(a) for a in art}
        infeasibility = float(sum(xB[pos] for pos in range(m) if basis[pos] in art_set))
        infeasibility += float(sum(val[j] for j in art if self.status[j] != _BASIC))
        if infeasibility > self.tol_feas * max(1.0, float(np.abs(self.b).max(initial=0.0))):
            return "infeasible", None, self.iterations

        # pin artificials to zero for phase 2
        self.lower[art] = 0.0
        self.upper[art] = 0.0
        for j in art:
            if self.status[j] != _BASIC:
                val[j] = 0.0
                self.status[j] = _AT_LOWER

        basis, Binv, xB, val, outcome = self._iterate(self.c, basis, Binv, xB, val, max_iter, phase=2)
        if outcome == "iteration_limit":
            raise SolverFailureError("phase-2 iteration limit reached")
        if outcome == "unbounded":
            return "unbounded", None, self.iterations

        x = val.copy()
        for pos, j in enumerate(basis):
            x[j] = xB[pos]
        return "optimal", x[: self.n_struct], self.iterations

    def _iterate(self, cost, basis, Binv, xB, val, max_iter, phase):
        A = self.A
        lower, upper = self.lower, self.upper
        total = A.shape[1]
        bland = False
        stall = 0
        basis_arr = np.asarray(basis)

        while True:
            if self.iterations >= max_iter:
                return basis, Binv, xB, val, "iteration_limit"
            self.iterations += 1

            y = cost[basis_arr] @ Binv
            reduced = cost - y @ A
            improving_low = (self.status == _AT_LOWER) & (reduced < -self.tol_opt)
            improving_up = (self.status == _AT_UPPER) & (reduced > self.tol_opt)
            improving_free = (self.status == _FREE) & (np.abs(reduced) > self.tol_opt)
            fixed = ~(lower < upper)  # never move variables pinned by equal bounds
            eligible = (improving_low | improving_up | improving_free) & ~fixed
            if phase == 2:
                # artificials stay out once phase 1 ends
                eligible[self.n_struct + self.m :] &= False
            candidates = np.nonzero(eligible)[0]
            if candidates.size == 0:
                return basis, Binv, xB, val, "optimal"
            if bland:
                j = int(candidates[0])
            else:
                magnitudes = np.abs(reduced[candidates])
                best = magnitudes.max()
                j = int(candidates[magnitudes >= best - 0.0][0])
            direction = 1.0 if (self.status[j] == _AT_LOWER or (self.status[j] == _FREE and reduced[j] < 0)) else -1.0

            d = Binv @ A[:, j]
            delta = direction * d
            # ratio test over basic variables
            t_best = math.inf
            leave_pos = -1
            leave_to_lower = True
            for pos in range(self.m):
                dd = delta[pos]
                bi = basis[pos]
                if dd > _PIVOT_TOL:
                    if math.isfinite(lower[bi]):
                        t = (xB[pos] - lower[bi]) / dd
                        if t < t_best - 1e-12 or (abs(t - t_best) <= 1e-12 and (leave_pos == -1 or bi < basis[leave_pos])):
                            t_best, leave_pos, leave_to_lower = t, pos, True
                elif dd < -_PIVOT_TOL:
                    if math.isfinite(upper[bi]):
                        t = (upper[bi] - xB[pos]) / (-dd)
                        if t < t_best - 1e-12 or (abs(t - t_best) <= 1e-12 and (leave_pos == -1 or bi < basis[leave_pos])):
                            t_best, leave_pos, leave_to_lower = t, pos, False
            span = upper[j] - lower[j]
            t_own = span if math.isfinite(span) else math.inf

            if t_own <= t_best:
                if not math.isfinite(t_own):
                    if phase == 1:
                        raise SolverFailureError("unbounded direction in phase 1")
                    return basis, Binv, xB, val, "unbounded"
                # bound flip: variable crosses to its opposite bound
                xB -= t_own * delta
                val[j] = upper[j] if self.status[j] == _AT_LOWER else lower[j]
                self.status[j] = _AT_UPPER if self.status[j] == _AT_LOWER else _AT_LOWER
                stall = stall + 1 if t_own <= _DEGENERATE_STEP else 0
                bland = stall >= _BLAND_TRIGGER
                continue

            if not math.isfinite(t_best):
                if phase == 1:
                    raise SolverFailureError("unbounded direction in phase 1")
                return basis, Binv, xB, val, "unbounded"

            t_best = max(t_best, 0.0)
            entering_value = val[j] + direction * t_best
            xB -= t_best * delta
            leaving = basis[leave_pos]
            val[leaving] = lower[leaving] if leave_to_lower else upper[leaving]
            self.status[leaving] = _AT_LOWER if leave_to_lower else _AT_UPPER
            basis[leave_pos] = j
            basis_arr[leave_pos] = j
            self.status[j] = _BASIC
            xB[leave_pos] = entering_value

            pivot = d[leave_pos]
            if abs(pivot) < _PIVOT_TOL:
                raise SolverFailureError(f"vanishing pivot at row {leave_pos}, column {j}")
            Binv[leave_pos, :] /= pivot
            others = [p for p in range(self.m) if p != leave_pos]
            if others:
                Binv[others, :] -= np.outer(d[others], Binv[leave_pos, :])

            stall = stall + 1 if t_best <= _DEGENERATE_STEP else 0
            bland = stall >= _BLAND_TRIGGER

            if self.iterations % _REFACTOR_EVERY == 0:
                Binv, xB = self._refactor(basis, val)

        # not reached

    def _refactor(self, basis, val):
        B = self.A[:, basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverFailureError("singular basis during refactorization") from exc
        mask = np.ones(self.A.shape[1], dtype=bool)
        mask[np.asarray(basis)] = False
        b_eff = self.b - self.A[:, mask] @ val[mask]
        return Binv, Binv @ b_eff


def _solve_simplex(lp: LinearProgram, tol_feas: float, tol_opt: float) -> Solution:
    names, A, b, senses, c, lower, upper = _to_arrays(lp)
    m, n = A.shape

    if m == 0:
        # pure bound problem: optimize each variable independently
        values = {}
        objective = 0.0
        for j, name in enumerate(names):
            if c[j] > 0:
                best = lower[j]
            elif c[j] < 0:
                best = upper[j]
            else:
                best = lower[j] if math.isfinite(lower[j]) else (upper[j] if math.isfinite(upper[j]) else 0.0)
            if c[j] != 0 and not math.isfinite(best):
                return Solution("unbounded", {}, math.inf, math.inf, 0)
            if not math.isfinite(best):
                best = 0.0
            values[name] = float(best)
            objective += c[j] * best
        if lp.direction == "max":
            objective = -objective
        residual = check_feasibility(lp, values, scaled=True) if names else 0.0
        return Solution("optimal", values, float(objective), float(residual), 0)

    A_s, b_s, lower_s, upper_s, c_s, _row_scale, col_scale = _equilibrate(A, b, lower, upper, c)
    solver = _Simplex(A_s, b_s, c_s, lower_s, upper_s, tol_feas, tol_opt)
    status, x_scaled, iterations = solver.solve(senses)
    if status != "optimal":
        return Solution(status, {}, math.nan, math.inf, iterations)
    x = x_scaled * col_scale
    values = {name: float(x[j]) for j, name in enumerate(names)}
    objective = float(sum(coeff * values[var] for coeff, var in lp.objective))
    residual = check_feasibility(lp, values, scaled=True)
    if residual > max(tol_feas, feasibility_tolerance()):
        raise SolverFailureError(f"solution residual {residual:.3e} exceeds tolerance")
    return Solution("optimal", values, objective, float(residual), iterations)


# ---------------------------------------------------------------------------
# HiGHS backend (scipy)
# ---------------------------------------------------------------------------


def _solve_highs(lp: LinearProgram, tol_feas: float) -> Solution:
    from scipy import optimize, sparse

    names, A, b, senses, c, lower, upper = _to_arrays(lp)
    m, n = A.shape
    rows_ub = [i for i, s in enumerate(senses) if s != EQUAL]
    rows_eq = [i for i, s in enumerate(senses) if s == EQUAL]
    sign = np.array([1.0 if senses[i] == LESS_EQUAL else -1.0 for i in rows_ub])
    A_ub = sparse.csr_matrix(A[rows_ub] * sign[:, None]) if rows_ub else None
    b_ub = b[rows_ub] * sign if rows_ub else None
    A_eq = sparse.csr_matrix(A[rows_eq]) if rows_eq else None
    b_eq = b[rows_eq] if rows_eq else None
    bounds = [(lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None) for lo, hi in zip(lower, upper)]
    result = optimize.linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
    )
    if result.status == 2:
        return Solution("infeasible", {}, math.nan, math.inf, int(result.nit or 0))
    if result.status == 3:
        return Solution("unbounded", {}, math.nan, math.inf, int(result.nit or 0))
    if result.status != 0:
        raise SolverFailureError(f"HiGHS failed: {result.message}")
    values = {name: float(result.x[j]) for j, name in enumerate(names)}
    objective = float(sum(coeff * values[var] for coeff, var in lp.objective))
    residual = check_feasibility(lp, values, scaled=True)
    if residual > max(tol_feas, feasibility_tolerance()) * 10:
        raise SolverFailureError(f"HiGHS residual {residual:.3e} exceeds tolerance")
    return Solution("optimal", values, objective, float(residual), int(result.nit or 0))


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

#: Problems with at most this many rows+columns use the reference simplex
#: under the "auto" backend; larger ones go to HiGHS.
AUTO_SIZE_LIMIT = 700


def solve(
    lp: LinearProgram,
    backend: str = "auto",
    tol_feas: float | None = None,
    tol_opt: float = DEFAULT_OPT_TOL,
) -> Solution:
    """Solve ``lp`` and return a :class:`Solution`.

    ``backend`` is ``"simplex"`` (reference), ``"highs"`` (scipy), or
    ``"auto"`` which picks the reference backend for small programs.
    """
    lp.validate()
    if tol_feas is None:
        tol_feas = feasibility_tolerance()
    if backend == "auto":
        size = len(lp.variables) + len(lp.constraints)
        backend = "simplex" if size <= AUTO_SIZE_LIMIT else "highs"
    if backend == "simplex":
        return _solve_simplex(lp, tol_feas, tol_opt)
    if backend == "highs":
        return _solve_highs(lp, tol_feas)
    raise InvalidInputError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# Fixed-format MPS export
# ---------------------------------------------------------------------------


def _mps_number(value: float) -> str:
    for precision in (10, 8, 6, 4):
        text = f"%.{precision}G" % value
        if len(text) <= 12:
            return text
    return f"%.2G" % value


def to_mps(lp: LinearProgram, name: str = "STABLEHH") -> str:
    """Serialize to fixed-format MPS (8-character names, fixed columns).

    Variables and rows are renamed ``X0000001`` / ``R0000001`` in
    declaration order to satisfy the 8-character field width; a comment
    legend maps them back.  Maximization problems are written with the
    negated objective, as fixed MPS has no sense record.
    """
    lp.validate()
    var_names = {v.name: f"X{j + 1:07d}" for j, v in enumerate(lp.variables)}
    row_names = {r.name: f"R{i + 1:07d}" for i, r in enumerate(lp.constraints)}
    sense_code = {LESS_EQUAL: "L", GREATER_EQUAL: "G", EQUAL: "E"}
    obj_sign = -1.0 if lp.direction == "max" else 1.0

    lines: list[str] = []
    lines.append(f"* generated by stablehh; {'objective negated from MAX' if obj_sign < 0 else 'minimization'}")
    for original, short in var_names.items():
        lines.append(f"* column {short} = {original}")
    for original, short in row_names.items():
        lines.append(f"* row    {short} = {original}")
    lines.append(f"NAME          {name[:8]:<8}")
    lines.append("ROWS")
    lines.append(" N  COST")
    for row in lp.constraints:
        lines.append(f" {sense_code[row.sense]}  {row_names[row.name]}")
    lines.append("COLUMNS")
    objective = {var: coeff * obj_sign for coeff, var in lp.objective}
    column_rows: dict[str, list[tuple[str, float]]] = {v.name: [] for v in lp.variables}
    for row in lp.constraints:
        for coeff, var in row.terms:
            column_rows[var].append((row_names[row.name], coeff))
    for var in lp.variables:
        entries: list[tuple[str, float]] = []
        if var.name in objective and objective[var.name] != 0.0:
            entries.append(("COST", objective[var.name]))
        entries.extend(column_rows[var.name])
        for start in range(0, len(entries), 2):
            chunk = entries[start : start + 2]
            line = f"    {var_names[var.name]:<8}  {chunk[0][0]:<8}  {_mps_number(chunk[0][1]):<12}"
            if len(chunk) == 2:
                line += f"   {chunk[1][0]:<8}  {_mps_number(chunk[1][1]):<12}"
            lines.append(line.rstrip())
    lines.append("RHS")
    for row in lp.constraints:
        if row.rhs != 0.0:
            lines.append(f"    RHS       {row_names[row.name]:<8}  {_mps_number(row.rhs):<12}".rstrip())
    lines.append("BOUNDS")
    for var in lp.variables:
        short = var_names[var.name]
        lo, hi = var.lower, var.upper
        if lo == hi:
            lines.append(f" FX BND       {short:<8}  {_mps_number(lo):<12}".rstrip())
            continue
        if not math.isfinite(lo) and not math.isfinite(hi):
            lines.append(f" FR BND       {short:<8}")
            continue
        if not math.isfinite(lo):
            lines.append(f" MI BND       {short:<8}")
        elif lo != 0.0:
            lines.append(f" LO BND       {short:<8}  {_mps_number(lo):<12}".rstrip())
        if math.isfinite(hi):
            lines.append(f" UP BND       {short:<8}  {_mps_number(hi):<12}".rstrip())
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"
