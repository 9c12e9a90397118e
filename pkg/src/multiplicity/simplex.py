"""Dense bounded-variable primal simplex for box-constrained linear programs.

All variables carry finite bounds (every variable in the integer programs
built by this package lives in [0,1], [-1,0] or [-1,1]), which rules out
unbounded problems and lets nonbasic variables sit at either bound.

Implementation notes:

* rows are turned into equalities with one slack per row whose bounds encode
  the relation; slack bounds are derived from the variable box, so they stay
  finite;
* an artificial variable per row provides an identity starting basis; rows
  whose slack already absorbs the residual start with the slack basic
  instead, so phase 1 only runs when some residual is out of range;
* pricing is Dantzig's rule with a permanent switch to Bland's rule after
  5*(rows+cols) degenerate steps, which guarantees termination;
* the tableau B^-1 A is updated by explicit pivots and refactorized from
  scratch every REFACTOR_INTERVAL pivots to keep drift in check.

Everything is deterministic: identical inputs produce identical pivot
sequences and bit-identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import InternalConsistencyError

FEASIBILITY_TOL = 1e-7
OPTIMALITY_TOL = 1e-7
PIVOT_TOL = 1e-9
DEGENERATE_STEP = 1e-12
REFACTOR_INTERVAL = 256

LESS_EQUAL = "<="
EQUAL = "="
GREATER_EQUAL = ">="
_RELATIONS = (LESS_EQUAL, EQUAL, GREATER_EQUAL)


@dataclass(frozen=True)
class LinearProgram:
    """min objective . v  subject to  row_coefs v (rel) row_rhs,  lo <= v <= hi."""

    objective: np.ndarray
    row_coefs: np.ndarray
    row_relations: tuple
    row_rhs: np.ndarray
    var_lo: np.ndarray
    var_hi: np.ndarray

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        coefs = np.asarray(self.row_coefs, dtype=float)
        if coefs.ndim != 2:
            coefs = coefs.reshape(0, obj.size) if coefs.size == 0 else np.atleast_2d(coefs)
        rhs = np.asarray(self.row_rhs, dtype=float)
        lo = np.asarray(self.var_lo, dtype=float)
        hi = np.asarray(self.var_hi, dtype=float)
        n = obj.size
        if coefs.shape[1] != n and coefs.shape[0] > 0:
            raise ValueError("row coefficient width must match variable count")
        if coefs.shape[0] != rhs.size or coefs.shape[0] != len(self.row_relations):
            raise ValueError("row count mismatch between coefs, relations and rhs")
        if lo.size != n or hi.size != n:
            raise ValueError("bound vectors must match variable count")
        for rel in self.row_relations:
            if rel not in _RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("all variable bounds must be finite")
        if np.any(lo > hi + 1e-12):
            raise ValueError("found a variable with lo > hi")
        for name, arr in (
            ("objective", obj),
            ("row_coefs", coefs),
            ("row_rhs", rhs),
            ("var_lo", lo),
            ("var_hi", hi),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "row_relations", tuple(self.row_relations))

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.row_rhs.size


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    values: Optional[np.ndarray]
    objective_value: float
    n_pivots: int = 0


def solve_lp(lp: LinearProgram, iteration_limit: Optional[int] = None) -> LpSolution:
    """Solve a box-bounded LP to a vertex optimum, or prove infeasibility."""
    state = _Tableau(lp)
    if state.infeasible_by_bounds:
        return LpSolution("infeasible", None, float("nan"))
    if iteration_limit is None:
        iteration_limit = 200 * (state.m + state.n_ext) + 2000
    pivots = 0

    if state.needs_phase1:
        status, used = state.optimize(state.phase1_cost, iteration_limit, stop_at=1e-9)
        pivots += used
        if status == "iteration_limit":
            return LpSolution("iteration_limit", None, float("nan"), pivots)
        if state.current_objective(state.phase1_cost) > FEASIBILITY_TOL:
            return LpSolution("infeasible", None, float("nan"), pivots)
    state.fix_artificials()

    status, used = state.optimize(state.phase2_cost, iteration_limit - pivots)
    pivots += used
    if status == "iteration_limit":
        return LpSolution("iteration_limit", None, float("nan"), pivots)

    values = state.structural_values()
    _verify(lp, values)
    objective = float(np.dot(lp.objective, values))
    values.flags.writeable = False
    return LpSolution("optimal", values, objective, pivots)


def solve_lp_with_fixings(
    lp: LinearProgram, fixings: dict, iteration_limit: Optional[int] = None
) -> LpSolution:
    """Solve ``lp`` with some variables pinned to fixed values.

    Equivalent to collapsing the corresponding bounds and calling solve_lp;
    a fixing outside the variable's bounds makes the program infeasible.
    """
    if not fixings:
        return solve_lp(lp, iteration_limit)
    lo = lp.var_lo.copy()
    hi = lp.var_hi.copy()
    for j, value in fixings.items():
        if value < lp.var_lo[j] - 1e-9 or value > lp.var_hi[j] + 1e-9:
            return LpSolution("infeasible", None, float("nan"))
        lo[j] = hi[j] = float(value)
    collapsed = LinearProgram(
        objective=lp.objective,
        row_coefs=lp.row_coefs,
        row_relations=lp.row_relations,
        row_rhs=lp.row_rhs,
        var_lo=lo,
        var_hi=hi,
    )
    return solve_lp(collapsed, iteration_limit)


def _verify(lp: LinearProgram, values: np.ndarray) -> None:
    if np.any(values < lp.var_lo - 1e-6) or np.any(values > lp.var_hi + 1e-6):
        raise InternalConsistencyError("simplex returned out-of-bounds values")
    if lp.n_rows == 0:
        return
    activity = lp.row_coefs @ values
    scale = 1.0 + np.abs(lp.row_rhs)
    for k, rel in enumerate(lp.row_relations):
        resid = activity[k] - lp.row_rhs[k]
        bad = (
            (rel == LESS_EQUAL and resid > 1e-6 * scale[k])
            or (rel == GREATER_EQUAL and resid < -1e-6 * scale[k])
            or (rel == EQUAL and abs(resid) > 1e-6 * scale[k])
        )
        if bad:
            raise InternalConsistencyError(
                f"simplex solution violates row {k}: residual {resid:.3e}"
            )


class _Tableau:
    """Mutable simplex state over [structurals | slacks | artificials]."""

    def __init__(self, lp: LinearProgram):
        n, m = lp.n_vars, lp.n_rows
        self.m = m
        self.n_struct = n
        self.n_ext = n + 2 * m
        self.infeasible_by_bounds = False

        lo = np.concatenate([lp.var_lo, np.zeros(m), np.zeros(m)])
        hi = np.concatenate([lp.var_hi, np.zeros(m), np.zeros(m)])

        A = np.zeros((m, self.n_ext))
        if m:
            A[:, :n] = lp.row_coefs
            A[:, n : n + m] = np.eye(m)
            A[:, n + m :] = np.eye(m)

        # Slack bounds from the relation and the reachable activity range.
        pos = np.clip(lp.row_coefs, 0.0, None) if m else np.zeros((0, n))
        neg = np.clip(lp.row_coefs, None, 0.0) if m else np.zeros((0, n))
        act_min = pos @ lp.var_lo + neg @ lp.var_hi
        act_max = pos @ lp.var_hi + neg @ lp.var_lo
        for k, rel in enumerate(lp.row_relations):
            b = lp.row_rhs[k]
            s_lo, s_hi = b - act_max[k], b - act_min[k]
            if rel == LESS_EQUAL:
                s_lo = max(s_lo, 0.0)
            elif rel == GREATER_EQUAL:
                s_hi = min(s_hi, 0.0)
            else:
                s_lo = s_hi = 0.0
            if s_lo > s_hi + 1e-9:
                self.infeasible_by_bounds = True
                return
            lo[n + k] = s_lo
            hi[n + k] = max(s_hi, s_lo)

        self.A = A
        self.lo = lo
        self.hi = hi
        self.b = lp.row_rhs.astype(float).copy()

        # Identity starting basis: slack where its bounds absorb the
        # residual, artificial otherwise.
        self.at_upper = np.zeros(self.n_ext, dtype=bool)
        self.basis = np.empty(m, dtype=int)
        self.phase1_cost = np.zeros(self.n_ext)
        residual_target = self.b - (A[:, :n] @ lp.var_lo if m else 0.0)
        self.needs_phase1 = False
        for k in range(m):
            t = residual_target[k] if m else 0.0
            s_lo, s_hi = lo[n + k], hi[n + k]
            if s_lo - FEASIBILITY_TOL <= t <= s_hi + FEASIBILITY_TOL:
                self.basis[k] = n + k
            else:
                s_at = s_lo if t < s_lo else s_hi
                self.at_upper[n + k] = s_at == s_hi and s_hi > s_lo
                r = t - s_at
                a = n + m + k
                self.basis[k] = a
                self.lo[a], self.hi[a] = min(0.0, r), max(0.0, r)
                self.phase1_cost[a] = 1.0 if r > 0 else -1.0
                if abs(r) > FEASIBILITY_TOL:
                    self.needs_phase1 = True

        self.phase2_cost = np.concatenate([lp.objective, np.zeros(2 * m)])
        self.T = A.copy()  # B^-1 A with B = I initially
        self.Tb = self.b.copy()
        self._pivots_since_refactor = 0
        self._degenerate_steps = 0
        self._use_bland = False

    # -- state helpers -------------------------------------------------

    def fix_artificials(self) -> None:
        art = slice(self.n_struct + self.m, self.n_ext)
        self.lo[art] = 0.0
        self.hi[art] = 0.0
        self.at_upper[art] = False

    def _full_values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.hi, self.lo)
        if self.m:
            xn = x.copy()
            xn[self.basis] = 0.0
            x_basic = self.Tb - self.T @ xn
            x[self.basis] = x_basic
        return x

    def structural_values(self) -> np.ndarray:
        return self._full_values()[: self.n_struct]

    def current_objective(self, cost: np.ndarray) -> float:
        return float(np.dot(cost, self._full_values()))

    def _refactor(self) -> None:
        if self.m == 0:
            return
        B = self.A[:, self.basis]
        self.T = np.linalg.solve(B, self.A)
        self.Tb = np.linalg.solve(B, self.b)
        self._pivots_since_refactor = 0

    # -- main loop ------------------------------------------------------

    def optimize(self, cost, iteration_limit, stop_at=None):
        """Run bounded-variable simplex iterations for the given objective.

        Returns ("optimal" | "iteration_limit", pivots_used).
        """
        if self.m == 0:
            # No rows: each variable sits at whichever bound its cost prefers.
            take_upper = cost[: self.n_struct] < 0
            self.at_upper[: self.n_struct] = take_upper
            return "optimal", 0
        pivots = 0
        while pivots < iteration_limit:
            if self._pivots_since_refactor >= REFACTOR_INTERVAL:
                self._refactor()

            x = self._full_values()
            if stop_at is not None and float(np.dot(cost, x)) <= stop_at:
                return "optimal", pivots

            z = cost - cost[self.basis] @ self.T
            nonbasic = np.ones(self.n_ext, dtype=bool)
            nonbasic[self.basis] = False
            free = nonbasic & (self.hi > self.lo)
            eligible = free & (
                (~self.at_upper & (z < -OPTIMALITY_TOL))
                | (self.at_upper & (z > OPTIMALITY_TOL))
            )
            if not eligible.any():
                return "optimal", pivots

            if self._use_bland:
                enter = int(np.argmax(eligible))
            else:
                scores = np.where(eligible, np.abs(z), -1.0)
                enter = int(np.argmax(scores))

            direction = -1.0 if self.at_upper[enter] else 1.0
            d = direction * self.T[:, enter]
            x_basic = x[self.basis]
            lb, ub = self.lo[self.basis], self.hi[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(
                    d > PIVOT_TOL,
                    (x_basic - lb) / np.where(d > PIVOT_TOL, d, 1.0),
                    np.where(
                        d < -PIVOT_TOL,
                        (ub - x_basic) / np.where(d < -PIVOT_TOL, -d, 1.0),
                        np.inf,
                    ),
                )
            ratio = np.maximum(ratio, 0.0)
            t_flip = self.hi[enter] - self.lo[enter]
            min_ratio = float(ratio.min()) if ratio.size else np.inf

            pivots += 1
            if t_flip <= min_ratio + 1e-12:
                # Entering variable runs to its opposite bound; no basis change.
                self.at_upper[enter] = not self.at_upper[enter]
                step = t_flip
            else:
                candidates = np.flatnonzero(ratio <= min_ratio + 1e-9)
                leave_row = int(candidates[np.argmin(self.basis[candidates])])
                leaving = int(self.basis[leave_row])
                self.at_upper[leaving] = d[leave_row] < 0
                piv = self.T[leave_row, enter]
                self.T[leave_row] /= piv
                self.Tb[leave_row] /= piv
                col = self.T[:, enter].copy()
                col[leave_row] = 0.0
                self.T -= np.outer(col, self.T[leave_row])
                self.Tb -= col * self.Tb[leave_row]
                self.basis[leave_row] = enter
                self._pivots_since_refactor += 1
                step = min_ratio

            if step < DEGENERATE_STEP:
                self._degenerate_steps += 1
                if self._degenerate_steps > 5 * (self.m + self.n_ext):
                    self._use_bland = True
            else:
                self._degenerate_steps = 0
        return "iteration_limit", pivots
