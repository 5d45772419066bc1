"""Pure numpy simplex kernel, used when the compiled extension is unavailable.

The tableau ``T`` holds ``B^-1 [A, -I]`` for the current basis, so basic
values satisfy ``x_B = -T_N x_N``.  Both kernels follow the same pivoting
rules step for step.
"""

from __future__ import annotations

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITER_LIMIT = 0, 1, 2, 3

PIVOT_TOL = 1e-9
DROP_TOL = 1e-13
REFRESH_EVERY = 64


def pivot(T: np.ndarray, r: int, j: int) -> None:
    """Gauss-Jordan pivot of ``T`` on entry ``(r, j)`` in place."""
    prow = T[r] / T[r, j]
    T[r] = prow
    col = T[:, j].copy()
    col[r] = 0.0
    rows = np.nonzero(col)[0]
    if rows.size:
        nz = np.nonzero(prow)[0]
        sub = T[np.ix_(rows, nz)] - np.outer(col[rows], prow[nz])
        sub[np.abs(sub) < DROP_TOL] = 0.0
        T[np.ix_(rows, nz)] = sub
        T[rows, j] = 0.0


def refresh_basic(T: np.ndarray, x: np.ndarray, basis: np.ndarray, state: np.ndarray) -> None:
    """Recompute basic values from the nonbasic ones."""
    xn = np.where(state >= 0, x, 0.0)
    x[basis] = -(T @ xn)


def run_simplex(
    T: np.ndarray,
    x: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    c: np.ndarray,
    basis: np.ndarray,
    state: np.ndarray,
    max_iter: int,
    feas_tol: float,
    dual_tol: float,
    bland_after: int,
) -> tuple[int, int, int, int, int]:
    """Bounded primal simplex with composite phase 1, maximizing ``c @ x``.

    ``state`` is -1 for basic, 0 at lower bound, 1 at upper bound.
    Returns ``(status, iterations, degenerate_pivots, last_row, last_col)``.
    """
    m, N = T.shape
    it = 0
    degen = 0
    last_r = last_j = -1
    since_refresh = 0
    while it < max_iter:
        xb = x[basis]
        lob = lo[basis]
        hib = hi[basis]
        below = xb < lob - feas_tol
        above = xb > hib + feas_tol
        phase1 = bool(below.any() or above.any())
        if phase1:
            cb = below.astype(np.float64) - above.astype(np.float64)
            cost = np.zeros(N)
        else:
            cb = c[basis]
            cost = c
        rows = np.nonzero(cb)[0]
        d = cost - cb[rows] @ T[rows] if rows.size else cost.copy()
        # eligible entering columns
        up = (state == 0) & (d > dual_tol) & (hi > lo)
        down = (state == 1) & (d < -dual_tol)
        elig = up | down
        if not elig.any():
            return (INFEASIBLE if phase1 else OPTIMAL), it, degen, last_r, last_j
        if degen >= bland_after:
            j = int(np.argmax(elig))
        else:
            score = np.where(elig, np.abs(d), -1.0)
            j = int(np.argmax(score))
        s = 1.0 if state[j] == 0 else -1.0
        alpha = -s * T[:, j]
        theta_flip = hi[j] - lo[j]
        # ratio test
        lim = np.full(m, np.inf)
        to_hi = np.zeros(m, dtype=bool)
        big = np.abs(alpha) > PIVOT_TOL
        pos = big & (alpha > 0)
        neg = big & (alpha < 0)
        if phase1:
            feas = ~(below | above)
            a = pos & feas
            lim[a] = (hib[a] - xb[a]) / alpha[a]
            to_hi[a] = True
            a = neg & feas
            lim[a] = (lob[a] - xb[a]) / alpha[a]
            a = pos & below
            lim[a] = (lob[a] - xb[a]) / alpha[a]
            a = neg & above
            lim[a] = (hib[a] - xb[a]) / alpha[a]
            to_hi[a] = True
        else:
            lim[pos] = (hib[pos] - xb[pos]) / alpha[pos]
            to_hi[pos] = True
            lim[neg] = (lob[neg] - xb[neg]) / alpha[neg]
        lim = np.where(np.isnan(lim), np.inf, np.maximum(lim, 0.0))
        best = float(lim.min()) if m else np.inf
        if best == np.inf and theta_flip == np.inf:
            return UNBOUNDED, it, degen, last_r, j
        it += 1
        if theta_flip <= best:
            x[j] = hi[j] if s > 0 else lo[j]
            x[basis] = xb + alpha * theta_flip
            state[j] = 1 if s > 0 else 0
            continue
        cand = np.nonzero(lim <= best + 1e-12)[0]
        if degen >= bland_after:
            r = int(cand[np.argmin(basis[cand])])
        else:
            r = int(cand[np.argmax(np.abs(alpha[cand]))])
        step = float(lim[r])
        if step < 1e-12:
            degen += 1
        leave = int(basis[r])
        x[basis] = xb + alpha * step
        x[j] += s * step
        x[leave] = hi[leave] if to_hi[r] else lo[leave]
        state[leave] = 1 if to_hi[r] else 0
        pivot(T, r, j)
        basis[r] = j
        state[j] = -1
        last_r, last_j = r, j
        since_refresh += 1
        if since_refresh >= REFRESH_EVERY:
            refresh_basic(T, x, basis, state)
            since_refresh = 0
    return ITER_LIMIT, it, degen, last_r, last_j
