"""Hot numeric kernels for the simplex inner loop.

Each kernel exists twice: a vectorized numpy version and an explicit-loop
version compiled with numba's @njit. The active backend is picked at import
time. Set ``GREENNET_NUMBA=0`` to force the numpy path; the numpy path is
also the automatic fallback when numba is not importable.

``benchmarks/bench_simplex.py`` times the two paths against each other and
asserts they agree.
"""

from __future__ import annotations

import os

import numpy as np

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2
_FIXED = 3

_env = os.environ.get("GREENNET_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _env not in {"0", "off", "false", "no"}

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

NUMBA_ENABLED = HAS_NUMBA and NUMBA_REQUESTED


# ---------------------------------------------------------------- numpy path

def reduced_costs_numpy(cost, c_basis, tableau, out):
    """out = cost - c_basis @ tableau."""
    np.matmul(c_basis, tableau, out=out)
    np.subtract(cost, out, out=out)


def choose_entering_numpy(d, stat, tol):
    """Bland entering rule: smallest index eligible to improve, else -1."""
    eligible = ((stat == _AT_LOWER) & (d < -tol)) | ((stat == _AT_UPPER) & (d > tol))
    if not eligible.any():
        return -1
    return int(np.argmax(eligible))


def ratio_test_numpy(w, x_basis, basis, lo, hi, sigma, piv_tol):
    """Largest step the basic variables allow, with Bland tie-breaking.

    Returns (step, row). row is -1 when nothing blocks; otherwise it is the
    blocking row whose basic variable has the smallest index among all rows
    within a tie window of the minimum ratio, and step is that row's own
    exact ratio.
    """
    delta = -sigma * w
    t = np.full(w.shape, np.inf)
    up = delta > piv_tol
    if up.any():
        hb = hi[basis[up]]
        with np.errstate(invalid="ignore"):
            t[up] = np.where(hb < np.inf, np.maximum(0.0, (hb - x_basis[up]) / delta[up]), np.inf)
    dn = delta < -piv_tol
    if dn.any():
        lb = lo[basis[dn]]
        with np.errstate(invalid="ignore"):
            t[dn] = np.where(lb > -np.inf, np.maximum(0.0, (x_basis[dn] - lb) / (-delta[dn])), np.inf)
    tmin = t.min() if t.size else np.inf
    if not np.isfinite(tmin):
        return np.inf, -1
    tie = tmin + 1e-12 * (1.0 + tmin)
    rows = np.flatnonzero(t <= tie)
    row = int(rows[np.argmin(basis[rows])])
    return float(t[row]), row


def eliminate_numpy(tableau, row, col):
    """Gaussian pivot on (row, col): row scaled, col cleared elsewhere."""
    piv = tableau[row, col]
    tableau[row] /= piv
    tableau[row, col] = 1.0
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


# ----------------------------------------------------------------- loop path
# Same semantics as above, written as scalar loops for numba.

def _reduced_costs_loops(cost, c_basis, tableau, out):
    m, n = tableau.shape
    for j in range(n):
        acc = 0.0
        for i in range(m):
            acc += c_basis[i] * tableau[i, j]
        out[j] = cost[j] - acc


def _choose_entering_loops(d, stat, tol):
    for j in range(d.shape[0]):
        s = stat[j]
        if s == _AT_LOWER and d[j] < -tol:
            return j
        if s == _AT_UPPER and d[j] > tol:
            return j
    return -1


def _ratio_test_loops(w, x_basis, basis, lo, hi, sigma, piv_tol):
    m = w.shape[0]
    inf = np.inf
    tmin = inf
    for i in range(m):
        delta = -sigma * w[i]
        ti = inf
        if delta > piv_tol:
            hb = hi[basis[i]]
            if hb < inf:
                ti = (hb - x_basis[i]) / delta
        elif delta < -piv_tol:
            lb = lo[basis[i]]
            if lb > -inf:
                ti = (x_basis[i] - lb) / (-delta)
        if ti < 0.0:
            ti = 0.0
        if ti < tmin:
            tmin = ti
    if tmin == inf:
        return inf, -1
    tie = tmin + 1e-12 * (1.0 + tmin)
    row = -1
    best_var = np.iinfo(np.int64).max
    for i in range(m):
        delta = -sigma * w[i]
        ti = inf
        if delta > piv_tol:
            hb = hi[basis[i]]
            if hb < inf:
                ti = (hb - x_basis[i]) / delta
        elif delta < -piv_tol:
            lb = lo[basis[i]]
            if lb > -inf:
                ti = (x_basis[i] - lb) / (-delta)
        if ti < 0.0:
            ti = 0.0
        if ti <= tie and basis[i] < best_var:
            best_var = basis[i]
            row = i
    delta = -sigma * w[row]
    if delta > piv_tol:
        t = (hi[basis[row]] - x_basis[row]) / delta
    else:
        t = (x_basis[row] - lo[basis[row]]) / (-delta)
    if t < 0.0:
        t = 0.0
    return t, row


def _eliminate_loops(tableau, row, col):
    m, n = tableau.shape
    inv = 1.0 / tableau[row, col]
    for j in range(n):
        tableau[row, j] *= inv
    tableau[row, col] = 1.0
    for i in range(m):
        if i == row:
            continue
        f = tableau[i, col]
        if f != 0.0:
            for j in range(n):
                tableau[i, j] -= f * tableau[row, j]
        tableau[i, col] = 0.0


if NUMBA_ENABLED:
    _opts = dict(cache=True, nogil=True)
    reduced_costs_jit = njit(**_opts)(_reduced_costs_loops)
    choose_entering_jit = njit(**_opts)(_choose_entering_loops)
    ratio_test_jit = njit(**_opts)(_ratio_test_loops)
    eliminate_jit = njit(**_opts)(_eliminate_loops)

    reduced_costs = reduced_costs_jit
    choose_entering = choose_entering_jit
    ratio_test = ratio_test_jit
    eliminate = eliminate_jit
else:
    reduced_costs = reduced_costs_numpy
    choose_entering = choose_entering_numpy
    ratio_test = ratio_test_numpy
    eliminate = eliminate_numpy
