# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simplex kernel.

Same pivoting rules as the numpy kernel; the Gauss-Jordan update skips
zero entries of the pivot row and column, which keeps pivots cheap on the
sparse tableaus produced by scheduling models.
"""

from libc.math cimport fabs, INFINITY, isnan

import numpy as np

cdef double PIVOT_TOL = 1e-9
cdef double DROP_TOL = 1e-13
cdef long REFRESH_EVERY = 64

OPTIMAL, INFEASIBLE, UNBOUNDED, ITER_LIMIT = 0, 1, 2, 3


cdef void _pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t j, Py_ssize_t[::1] nz) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, k, q, cnt = 0
    cdef double piv = T[r, j], f, v
    for k in range(N):
        if T[r, k] != 0.0:
            T[r, k] = T[r, k] / piv
            nz[cnt] = k
            cnt += 1
    for i in range(m):
        if i == r:
            continue
        f = T[i, j]
        if f == 0.0:
            continue
        for q in range(cnt):
            k = nz[q]
            v = T[i, k] - f * T[r, k]
            if fabs(v) < DROP_TOL:
                v = 0.0
            T[i, k] = v
        T[i, j] = 0.0


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t j):
    """Gauss-Jordan pivot of ``T`` on entry ``(r, j)`` in place."""
    cdef Py_ssize_t[::1] nz = np.empty(T.shape[1], dtype=np.intp)
    _pivot(T, r, j, nz)


cdef void _refresh(double[:, ::1] T, double[::1] x, long[::1] basis, signed char[::1] state) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1], i, k
    cdef double acc
    for i in range(m):
        acc = 0.0
        for k in range(N):
            if state[k] >= 0 and T[i, k] != 0.0:
                acc = acc + T[i, k] * x[k]
        x[basis[i]] = -acc


def refresh_basic(double[:, ::1] T, double[::1] x, long[::1] basis, signed char[::1] state):
    """Recompute basic values from the nonbasic ones."""
    _refresh(T, x, basis, state)


def run_simplex(
    double[:, ::1] T,
    double[::1] x,
    double[::1] lo,
    double[::1] hi,
    double[::1] c,
    long[::1] basis,
    signed char[::1] state,
    long max_iter,
    double feas_tol,
    double dual_tol,
    long bland_after,
):
    """Bounded primal simplex with composite phase 1, maximizing ``c @ x``.

    Returns ``(status, iterations, degenerate_pivots, last_row, last_col)``.
    """
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, j, k, r, leave
    cdef long it = 0, degen = 0, since_refresh = 0
    cdef long last_r = -1, last_j = -1
    cdef bint phase1, bland, up_hit
    cdef double s, v, L, U, a, lim, best, best_abs, step, theta_flip, dj, score, best_score
    cdef double[::1] cb = np.zeros(m)
    cdef double[::1] d = np.zeros(N)
    cdef double[::1] alpha = np.zeros(m)
    cdef double[::1] lims = np.zeros(m)
    cdef signed char[::1] tohi = np.zeros(m, dtype=np.int8)
    cdef signed char[::1] kind = np.zeros(m, dtype=np.int8)  # -1 below, 0 feasible, 1 above
    cdef Py_ssize_t[::1] nz = np.empty(N, dtype=np.intp)
    while it < max_iter:
        phase1 = False
        for i in range(m):
            v = x[basis[i]]
            if v < lo[basis[i]] - feas_tol:
                kind[i] = -1
                phase1 = True
            elif v > hi[basis[i]] + feas_tol:
                kind[i] = 1
                phase1 = True
            else:
                kind[i] = 0
        for i in range(m):
            if phase1:
                cb[i] = -kind[i]
            else:
                cb[i] = c[basis[i]]
        for k in range(N):
            d[k] = 0.0 if phase1 else c[k]
        for i in range(m):
            if cb[i] != 0.0:
                for k in range(N):
                    if T[i, k] != 0.0:
                        d[k] = d[k] - cb[i] * T[i, k]
        bland = degen >= bland_after
        j = -1
        best_score = -1.0
        for k in range(N):
            if state[k] == 0:
                if not (d[k] > dual_tol and hi[k] > lo[k]):
                    continue
            elif state[k] == 1:
                if not (d[k] < -dual_tol):
                    continue
            else:
                continue
            if bland:
                j = k
                break
            score = fabs(d[k])
            if score > best_score:
                best_score = score
                j = k
        if j < 0:
            return (INFEASIBLE if phase1 else OPTIMAL), it, degen, last_r, last_j
        s = 1.0 if state[j] == 0 else -1.0
        theta_flip = hi[j] - lo[j]
        best = INFINITY
        for i in range(m):
            a = -s * T[i, j]
            alpha[i] = a
            lim = INFINITY
            tohi[i] = 0
            if fabs(a) > PIVOT_TOL:
                v = x[basis[i]]
                L = lo[basis[i]]
                U = hi[basis[i]]
                if kind[i] == 0:
                    if a > 0:
                        lim = (U - v) / a
                        tohi[i] = 1
                    else:
                        lim = (L - v) / a
                elif kind[i] == -1:
                    if a > 0:
                        lim = (L - v) / a
                else:
                    if a < 0:
                        lim = (U - v) / a
                        tohi[i] = 1
                if isnan(lim):
                    lim = INFINITY
                elif lim < 0.0:
                    lim = 0.0
            lims[i] = lim
            if lim < best:
                best = lim
        if best == INFINITY and theta_flip == INFINITY:
            return UNBOUNDED, it, degen, last_r, j
        it += 1
        if theta_flip <= best:
            x[j] = hi[j] if s > 0 else lo[j]
            for i in range(m):
                x[basis[i]] = x[basis[i]] + alpha[i] * theta_flip
            state[j] = 1 if s > 0 else 0
            continue
        r = -1
        best_abs = -1.0
        for i in range(m):
            if lims[i] <= best + 1e-12:
                if bland:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
                elif fabs(alpha[i]) > best_abs:
                    best_abs = fabs(alpha[i])
                    r = i
        step = lims[r]
        if step < 1e-12:
            degen += 1
        leave = basis[r]
        up_hit = tohi[r] == 1
        for i in range(m):
            x[basis[i]] = x[basis[i]] + alpha[i] * step
        x[j] = x[j] + s * step
        x[leave] = hi[leave] if up_hit else lo[leave]
        state[leave] = 1 if up_hit else 0
        _pivot(T, r, j, nz)
        basis[r] = j
        state[j] = -1
        last_r = r
        last_j = j
        since_refresh += 1
        if since_refresh >= REFRESH_EVERY:
            _refresh(T, x, basis, state)
            since_refresh = 0
    return ITER_LIMIT, it, degen, last_r, last_j
