"""LP relaxations and the bounded-variable primal simplex driver.

The kernel that runs the pivots comes from the compiled extension when it
is importable, otherwise from the numpy module.  Setting the environment
variable ``AGILESCHED_PURE_PYTHON=1`` forces the numpy kernel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..milp import MilpModel
from . import _simplex_py

try:  # pragma: no cover - depends on the build
    if os.environ.get("AGILESCHED_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python forced")
    from . import _simplex_ext as _kernel  # type: ignore[attr-defined]

    BACKEND = "cython"
except ImportError:
    _kernel = _simplex_py
    BACKEND = "python"

FEAS_TOL = 1e-7
DUAL_TOL = 1e-9
BLAND_AFTER = 5000

STATUS = {0: "Optimal", 1: "Infeasible", 2: "Unbounded", 3: "IterationLimit"}


def kernel_module(name: Optional[str] = None):
    """The kernel module for ``name`` ("cython" or "python"); default is the active one."""
    if name is None:
        return _kernel
    if name == "python":
        return _simplex_py
    if name == "cython":
        from . import _simplex_ext  # type: ignore[attr-defined]

        return _simplex_ext
    raise ValueError(f"unknown kernel {name!r}")


@dataclass
class LpProblem:
    """maximize ``c @ x`` s.t. ``row_lo <= A @ x <= row_hi``, ``lb <= x <= ub``."""

    c: np.ndarray
    A: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=np.float64)
        n = self.c.shape[0]
        self.A = np.asarray(self.A, dtype=np.float64).reshape(-1, n)
        self.row_lo = np.asarray(self.row_lo, dtype=np.float64)
        self.row_hi = np.asarray(self.row_hi, dtype=np.float64)
        self.lb = np.asarray(self.lb, dtype=np.float64)
        self.ub = np.asarray(self.ub, dtype=np.float64)
        if not (np.all(np.isfinite(self.lb)) and np.all(np.isfinite(self.ub))):
            raise ValueError("LP variables need finite bounds")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_model(cls, model: MilpModel) -> "LpProblem":
        """Continuous relaxation of ``model`` (binaries relaxed to [0, 1])."""
        n, m = model.n_vars, model.n_rows
        A = np.zeros((m, n))
        lo = np.full(m, -np.inf)
        hi = np.full(m, np.inf)
        for i in range(m):
            A[i, model.row_idx[i]] = model.row_val[i]
            s, b = model.row_sense[i], model.row_rhs[i]
            if s in ("<=", "="):
                hi[i] = b
            if s in (">=", "="):
                lo[i] = b
        c = np.zeros(n)
        for j, v in model.obj.items():
            c[j] = v
        return cls(c, A, lo, hi, np.array(model.lb), np.array(model.ub), tuple(model.var_names))

    def max_violation(self, x: np.ndarray) -> float:
        act = self.A @ x if self.m else np.zeros(0)
        v = [0.0]
        if self.m:
            v.append(float(np.max(self.row_lo - act)))
            v.append(float(np.max(act - self.row_hi)))
        v.append(float(np.max(self.lb - x)) if self.n else 0.0)
        v.append(float(np.max(x - self.ub)) if self.n else 0.0)
        return max(v)


@dataclass
class LpResult:
    status: str
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    detail: str = ""
    warm: Optional["SimplexState"] = field(default=None, repr=False)


@dataclass
class SimplexState:
    """Tableau and basis after a solve; reusable as a starting point."""

    T: np.ndarray
    x: np.ndarray
    basis: np.ndarray
    state: np.ndarray

    def copy(self) -> "SimplexState":
        return SimplexState(self.T.copy(), self.x.copy(), self.basis.copy(), self.state.copy())


def _initial_state(p: LpProblem, lb: np.ndarray) -> SimplexState:
    m, n = p.m, p.n
    T = np.empty((m, n + m))
    T[:, :n] = -p.A
    T[:, n:] = np.eye(m)
    x = np.empty(n + m)
    x[:n] = lb
    x[n:] = p.A @ lb if m else np.zeros(0)
    basis = np.arange(n, n + m, dtype=np.int64)
    state = np.zeros(n + m, dtype=np.int8)
    state[n:] = -1
    return SimplexState(T, x, basis, state)


def _adapt(st: SimplexState, lo: np.ndarray, hi: np.ndarray, n: int, kernel) -> None:
    """Move nonbasic variables onto their (possibly changed) bounds."""
    moved = False
    for j in np.nonzero(st.state >= 0)[0]:
        want = lo[j] if st.state[j] == 0 else hi[j]
        if not np.isfinite(want):
            st.state[j] = 1 - st.state[j]
            want = lo[j] if st.state[j] == 0 else hi[j]
        if st.x[j] != want:
            st.x[j] = want
            moved = True
    if moved:
        kernel.refresh_basic(st.T, st.x, st.basis, st.state)


def _full_matrix(p: LpProblem) -> np.ndarray:
    return np.hstack([p.A, -np.eye(p.m)])


def _recompute(p: LpProblem, st: SimplexState) -> bool:
    """Basic values from a fresh factorization of the final basis."""
    full = _full_matrix(p)
    nb = st.state >= 0
    rhs = -(full[:, nb] @ st.x[nb]) if p.m else np.zeros(0)
    try:
        st.x[st.basis] = np.linalg.solve(full[:, st.basis], rhs) if p.m else rhs
    except np.linalg.LinAlgError:
        return False
    return True


def _refactor(p: LpProblem, st: SimplexState) -> bool:
    """Rebuild the tableau and basic values from the original data."""
    full = _full_matrix(p)
    try:
        st.T[:, :] = np.linalg.solve(full[:, st.basis], full)
    except np.linalg.LinAlgError:
        return False
    st.T[np.abs(st.T) < _simplex_py.DROP_TOL] = 0.0
    _simplex_py.refresh_basic(st.T, st.x, st.basis, st.state)
    return True


def solve_lp(
    p: LpProblem,
    lb: Optional[np.ndarray] = None,
    ub: Optional[np.ndarray] = None,
    *,
    start: Optional[SimplexState] = None,
    max_iter: int = 200000,
    kernel=None,
    keep_state: bool = False,
) -> LpResult:
    """Optimize the relaxation, optionally with overridden variable bounds.

    ``start`` continues from an earlier tableau (it is modified in place).
    """
    kern = kernel if kernel is not None else _kernel
    lbv = p.lb if lb is None else np.asarray(lb, dtype=np.float64)
    ubv = p.ub if ub is None else np.asarray(ub, dtype=np.float64)
    n, m = p.n, p.m
    if np.any(lbv > ubv + FEAS_TOL):
        return LpResult("Infeasible", detail="crossed variable bounds")
    lo = np.concatenate([lbv, p.row_lo])
    hi = np.concatenate([ubv, p.row_hi])
    if np.any(lo > hi + FEAS_TOL):
        return LpResult("Infeasible", detail="crossed row bounds")
    c = np.concatenate([p.c, np.zeros(m)])
    st = start if start is not None else _initial_state(p, lbv)
    if start is not None:
        _adapt(st, lo, hi, n, kern)
    total = 0
    detail = ""
    status = 3
    for attempt in range(3):
        status, it, degen, lr, lj = kern.run_simplex(
            st.T, st.x, lo, hi, c, st.basis, st.state, max_iter - total, FEAS_TOL, DUAL_TOL, BLAND_AFTER
        )
        total += it
        if status == 2:
            return LpResult("Unbounded", iterations=total, detail=f"unbounded ray at column {lj}")
        if status == 3:
            return LpResult("IterationLimit", iterations=total)
        # verify against a fresh factorization of the final basis
        if not _recompute(p, st):
            return LpResult("NumericalFailure", iterations=total, detail=f"singular basis after pivot ({lr}, {lj})")
        xs = st.x
        viol = max(float(np.max(lo - xs, initial=0.0)), float(np.max(xs - hi, initial=0.0)))
        if status == 0 and viol <= FEAS_TOL:
            xv = np.clip(xs[:n], lbv, ubv)
            res = LpResult("Optimal", float(p.c @ xv), xv.copy(), total)
            if keep_state:
                res.warm = st
            return res
        if status == 1 and viol > FEAS_TOL:
            return LpResult("Infeasible", iterations=total)
        detail = f"inconsistent state after pivot ({lr}, {lj}), violation {viol:.3g}"
        if not _refactor(p, st):
            break
    return LpResult("NumericalFailure", iterations=total, detail=detail)
