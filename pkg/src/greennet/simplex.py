"""Bounded-variable primal simplex with Bland pivoting.

Solves  min c'x  s.t.  A x {<=, =, >=} b,  lo <= x <= hi.

Rows become equalities through one slack per row whose bounds encode the
sense ([0, inf) for <=, (-inf, 0] for >=, fixed 0 for =). A crash start uses
slacks where they can absorb the initial residual and artificial variables
elsewhere; phase one drives the artificial total to zero, phase two
optimizes the true objective. Nonbasic variables rest at a finite bound and
may flip to the opposite bound without a basis change.

Bland's rule is used throughout (lowest eligible index enters, lowest basic
index leaves among minimum-ratio ties), which precludes cycling on the
heavily degenerate models the builders produce. The tableau is refreshed
from scratch every few dozen pivots to keep rounding drift in check, and an
exact feasibility self-check runs before an optimal result is returned:
numerical trouble is reported, never absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"

_AT_LOWER = kernels._AT_LOWER
_AT_UPPER = kernels._AT_UPPER
_BASIC = kernels._BASIC
_FIXED = kernels._FIXED

_PIV_TOL = 1e-10     # entries at or below this never pivot
_DUAL_TOL = 1e-9     # reduced-cost eligibility threshold
_REFRESH_EVERY = 64  # pivots between tableau rebuilds

__all__ = ["LpResult", "NumericalInstabilityError", "solve_bounded_lp",
           "STATUS_OPTIMAL", "STATUS_INFEASIBLE", "STATUS_UNBOUNDED"]


class NumericalInstabilityError(RuntimeError):
    """The pivoting ran into numerical trouble that cannot be worked around."""


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int


class _State:
    """Working arrays of one solve. Columns: structural, slacks, artificials."""

    def __init__(self, a_full, b, lo, hi, stat, basis, x_basis):
        self.a_full = a_full
        self.b = b
        self.lo = lo
        self.hi = hi
        self.stat = stat
        self.basis = basis
        self.x_basis = x_basis
        self.tableau = None
        self.pivots = 0
        self.iterations = 0

    def nonbasic_values(self) -> np.ndarray:
        vals = np.where(self.stat == _AT_UPPER, self.hi, self.lo)
        vals[self.stat == _BASIC] = 0.0
        return vals

    def refresh(self):
        """Recompute tableau and basic values from the basis by direct solve."""
        basis_mat = self.a_full[:, self.basis]
        try:
            self.tableau = np.linalg.solve(basis_mat, self.a_full)
            rhs = self.b - self.a_full @ self.nonbasic_values()
            self.x_basis = np.linalg.solve(basis_mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalInstabilityError(f"singular basis: {exc}") from exc
        if not (np.all(np.isfinite(self.tableau)) and np.all(np.isfinite(self.x_basis))):
            raise NumericalInstabilityError("non-finite values after basis refresh")

    def full_assignment(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.x_basis
        return x


def _iterate(st: _State, cost: np.ndarray, max_iter: int) -> str:
    m = st.b.shape[0]
    n = st.a_full.shape[1]
    d = np.empty(n)
    while True:
        st.iterations += 1
        if st.iterations > max_iter:
            raise NumericalInstabilityError(
                f"no convergence within {max_iter} simplex iterations"
            )
        kernels.reduced_costs(cost, cost[st.basis], st.tableau, d)
        q = kernels.choose_entering(d, st.stat, _DUAL_TOL)
        if q < 0:
            return STATUS_OPTIMAL
        sigma = 1.0 if st.stat[q] == _AT_LOWER else -1.0
        w = st.tableau[:, q].copy()
        t_rows, row = kernels.ratio_test(
            w, st.x_basis, st.basis, st.lo, st.hi, sigma, _PIV_TOL
        )
        t_range = st.hi[q] - st.lo[q]
        if row < 0 or t_range <= t_rows:
            if not np.isfinite(t_range):
                return STATUS_UNBOUNDED
            # bound flip, no basis change
            st.x_basis -= sigma * t_range * w
            st.stat[q] = _AT_UPPER if st.stat[q] == _AT_LOWER else _AT_LOWER
        else:
            leaving = int(st.basis[row])
            st.x_basis -= sigma * t_rows * w
            if st.lo[leaving] == st.hi[leaving]:
                st.stat[leaving] = _FIXED  # else a zero-length flip could recur
            else:
                st.stat[leaving] = _AT_LOWER if -sigma * w[row] < 0 else _AT_UPPER
            st.x_basis[row] = st.lo[q] + t_rows if sigma > 0 else st.hi[q] - t_rows
            st.basis[row] = q
            st.stat[q] = _BASIC
            kernels.eliminate(st.tableau, row, q)
            st.pivots += 1
            if st.pivots % _REFRESH_EVERY == 0:
                st.refresh()


def solve_bounded_lp(
    c,
    a,
    senses,
    b,
    lo,
    hi,
    *,
    eps_feas: float = 1e-6,
    max_iter: int = 50_000,
) -> LpResult:
    """Solve the LP; senses is an int8 vector with 0 <=, 1 =, 2 >=.

    Every variable needs at least one finite bound. Raises
    NumericalInstabilityError instead of returning a wrong answer when the
    arithmetic goes bad.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    senses = np.asarray(senses, dtype=np.int8)
    b = np.asarray(b, dtype=np.float64)
    lo_s = np.asarray(lo, dtype=np.float64)
    hi_s = np.asarray(hi, dtype=np.float64)
    n = c.shape[0]

    if np.any(np.isinf(lo_s) & np.isinf(hi_s)):
        raise ValueError("free variables (both bounds infinite) are not supported")
    if np.any(lo_s > hi_s):
        return LpResult(STATUS_INFEASIBLE, None, np.inf, 0)

    # Vacuous rows (all-zero coefficients) are dropped after checking that
    # 0 (sense) rhs holds; a violated vacuous row settles infeasibility now.
    nonzero = np.abs(a).sum(axis=1) > 0 if a.size else np.zeros(len(b), dtype=bool)
    for i in np.flatnonzero(~nonzero):
        s, rhs = int(senses[i]), float(b[i])
        ok = (s == 0 and 0 <= rhs + eps_feas) or (
            s == 1 and abs(rhs) <= eps_feas
        ) or (s == 2 and 0 >= rhs - eps_feas)
        if not ok:
            return LpResult(STATUS_INFEASIBLE, None, np.inf, 0)
    a = a[nonzero]
    b = b[nonzero]
    senses = senses[nonzero]
    m = a.shape[0]

    # initial nonbasic resting point for structural variables
    x0 = np.where(np.isfinite(lo_s), lo_s, hi_s)
    stat0 = np.where(np.isfinite(lo_s), _AT_LOWER, _AT_UPPER).astype(np.int8)
    stat0[lo_s == hi_s] = _FIXED

    slack_lo = np.where(senses == 2, -np.inf, 0.0)
    slack_hi = np.where(senses == 0, np.inf, 0.0)
    slack_stat = np.where(senses == 2, _AT_UPPER, _AT_LOWER).astype(np.int8)
    slack_stat[senses == 1] = _FIXED

    resid = b - a @ x0 if m else np.zeros(0)
    basis = np.empty(m, dtype=np.int64)
    x_basis = np.empty(m)
    art_rows: list[int] = []
    art_signs: list[float] = []
    for i in range(m):
        r = resid[i]
        s = int(senses[i])
        absorbs = (s == 0 and r >= 0) or (s == 2 and r <= 0) or (s == 1 and abs(r) <= 1e-12)
        if absorbs:
            basis[i] = n + i
            x_basis[i] = r
        else:
            art_rows.append(i)
            art_signs.append(1.0 if r >= 0 else -1.0)
            basis[i] = n + m + len(art_rows) - 1
            x_basis[i] = abs(r)

    n_art = len(art_rows)
    a_art = np.zeros((m, n_art))
    for j, (i, sg) in enumerate(zip(art_rows, art_signs)):
        a_art[i, j] = sg
    a_full = np.hstack([a, np.eye(m), a_art])

    lo_full = np.concatenate([lo_s, slack_lo, np.zeros(n_art)])
    hi_full = np.concatenate([hi_s, slack_hi, np.full(n_art, np.inf)])
    stat = np.concatenate([stat0, slack_stat, np.full(n_art, _AT_LOWER, dtype=np.int8)])
    stat[basis] = _BASIC

    st = _State(a_full, b, lo_full, hi_full, stat, basis, x_basis)
    st.refresh()

    if n_art:
        cost1 = np.zeros(n + m + n_art)
        cost1[n + m:] = 1.0
        status = _iterate(st, cost1, max_iter)
        if status != STATUS_OPTIMAL:
            raise NumericalInstabilityError("phase one reported unbounded")
        infeas = float(cost1 @ st.full_assignment())
        if infeas > eps_feas:
            return LpResult(STATUS_INFEASIBLE, None, np.inf, st.iterations)
        # artificials are done; lock them at zero for phase two
        st.hi[n + m:] = 0.0
        nonbasic_art = [j for j in range(n + m, n + m + n_art) if st.stat[j] != _BASIC]
        st.stat[nonbasic_art] = _FIXED
        st.refresh()

    cost2 = np.concatenate([c, np.zeros(m + n_art)])
    status = _iterate(st, cost2, max_iter)
    if status == STATUS_UNBOUNDED:
        return LpResult(STATUS_UNBOUNDED, None, -np.inf, st.iterations)

    x_full = st.full_assignment()
    _self_check(a, senses, b, lo_s, hi_s, x_full[:n], eps_feas)
    x = np.clip(x_full[:n], lo_s, hi_s)
    return LpResult(STATUS_OPTIMAL, x, float(c @ x), st.iterations)


def _self_check(a, senses, b, lo, hi, x, eps):
    """Verify the claimed-optimal point actually satisfies the input."""
    tol = max(eps, 1e-7)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise NumericalInstabilityError("solution drifted outside variable bounds")
    if a.shape[0] == 0:
        return
    lhs = a @ x
    bad = (
        ((senses == 0) & (lhs > b + tol))
        | ((senses == 1) & (np.abs(lhs - b) > tol))
        | ((senses == 2) & (lhs < b - tol))
    )
    if bad.any():
        rows = np.flatnonzero(bad)[:5].tolist()
        raise NumericalInstabilityError(f"solution violates rows {rows} beyond {tol}")
