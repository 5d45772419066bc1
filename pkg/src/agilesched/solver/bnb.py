"""Best-bound branch-and-bound over the binaries of a :class:`MilpModel`."""

from __future__ import annotations

import heapq
import math
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..domain import Schedule, SolveReport, schedule_objective
from ..milp import AssignmentError, MilpModel, extract_schedule
from .lp import LpProblem, SimplexState, solve_lp

INT_TOL = 1e-6
BOUND_EPS = 1e-6
WARM_CACHE = 6


@dataclass(frozen=True)
class BnbLimits:
    time_limit_s: float = 10800.0
    gap_tolerance: float = 1e-6
    node_limit: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.time_limit_s > 0:
            raise ValueError("time_limit_s must be positive")
        if not self.gap_tolerance > 0:
            raise ValueError("gap_tolerance must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")


@dataclass(order=True)
class _Node:
    key: tuple
    nid: int
    parent: int
    fix: tuple[tuple[int, int], ...]
    bound: float
    depth: int


def _effective(bound: float, integral: bool) -> float:
    """Bound usable for pruning; with an integral objective it can be floored."""
    return math.floor(bound + BOUND_EPS) if integral else bound


def solve_exact(
    model: MilpModel,
    limits: BnbLimits = BnbLimits(),
    *,
    deterministic: bool = True,
    kernel=None,
    on_incumbent: Optional[Callable[[float, float], None]] = None,
) -> SolveReport:
    """Maximize ``model`` exactly within ``limits``.

    Only the single-worker search is implemented, so every run is
    reproducible; ``deterministic`` is accepted for interface stability.
    """
    t0 = time.perf_counter()
    p = LpProblem.from_model(model)
    bins = np.array(model.binaries, dtype=np.int64)
    obj_bins = p.c[bins] if bins.size else np.zeros(0)
    names = model.var_names
    integral = all(float(v).is_integer() for v in model.obj.values())
    base_lb, base_ub = p.lb.copy(), p.ub.copy()

    inc_x: Optional[np.ndarray] = None
    inc_j = 0.0
    inc_sched = Schedule()
    nodes = 0
    lp_iters = 0
    warm: "OrderedDict[int, SimplexState]" = OrderedDict()
    heap: list[_Node] = []
    seq = 0

    root = _Node((0, 0, 0), 0, -1, (), math.inf, 0)
    heapq.heappush(heap, root)
    root_bound = math.inf
    timed_out = False

    def open_bound() -> float:
        vals = [nd.bound for nd in heap]
        return max(vals) if vals else -math.inf

    while heap:
        if time.perf_counter() - t0 > limits.time_limit_s or (
            limits.node_limit is not None and nodes >= limits.node_limit
        ):
            timed_out = True
            break
        nd = heapq.heappop(heap)
        if nd.bound <= inc_j + (0.5 if integral else limits.gap_tolerance * max(inc_j, 1.0)):
            if inc_x is not None or nd.bound <= 0:
                continue
        lb, ub = base_lb.copy(), base_ub.copy()
        for j, v in nd.fix:
            lb[j] = ub[j] = v
        start = None
        if nd.parent in warm:
            st = warm[nd.parent]
            # the last sibling consumes the cached tableau, earlier ones take a copy
            start = st.copy() if _has_sibling_pending(heap, nd.parent) else warm.pop(nd.parent)
        res = solve_lp(p, lb, ub, start=start, kernel=kernel, keep_state=True)
        nodes += 1
        lp_iters += res.iterations
        if res.status == "NumericalFailure" and start is not None:
            res = solve_lp(p, lb, ub, kernel=kernel, keep_state=True)
            lp_iters += res.iterations
        if res.status != "Optimal":
            if nd.nid == 0:
                root_bound = 0.0 if res.status == "Infeasible" else root_bound
            continue
        bound = _effective(res.objective, integral)
        if nd.nid == 0:
            root_bound = bound
        if inc_x is not None and bound <= inc_j + (0.5 if integral else 0.0):
            continue
        xb = res.x[bins]
        frac = np.abs(xb - np.round(xb))
        if not np.any(frac > INT_TOL):
            x = res.x.copy()
            x[bins] = np.round(xb)
            try:
                sched = extract_schedule(model, x)
            except AssignmentError:
                sched = None
            if sched is not None:
                val = float(round(model.objective_value(x), 9))
                if inc_x is None or val > inc_j:
                    inc_x, inc_j, inc_sched = x, val, sched
                    if on_incumbent is not None:
                        on_incumbent(inc_j, max(inc_j, open_bound(), bound))
                continue
        # most fractional binary, preferring those that carry profit; ties by lowest name
        dist = np.abs(xb - 0.5)
        cand = np.nonzero(frac > INT_TOL)[0]
        if cand.size == 0:
            cand = np.arange(bins.size)
        paying = cand[obj_bins[cand] != 0.0]
        if paying.size:
            cand = paying
        best = dist[cand].min()
        ties = [int(bins[k]) for k in cand if dist[k] <= best + 1e-12]
        jb = min(ties, key=lambda j: names[j])
        if res.warm is not None:
            warm[nd.nid] = res.warm
            while len(warm) > WARM_CACHE:
                warm.popitem(last=False)
        key_b = -bound
        for v in (1, 0):
            seq += 1
            child = _Node((key_b, -(nd.depth + 1), seq), seq, nd.nid, nd.fix + ((jb, v),), bound, nd.depth + 1)
            heapq.heappush(heap, child)

    remaining = open_bound() if timed_out else -math.inf
    if inc_x is None:
        dual = root_bound if math.isfinite(root_bound) else (remaining if math.isfinite(remaining) else 0.0)
        dual = max(dual, remaining if math.isfinite(remaining) else 0.0)
    else:
        dual = max(inc_j, remaining)
    dual = max(dual, inc_j)
    j_val = float(schedule_objective_from_model(model, inc_x)) if inc_x is not None else 0.0
    gap = (dual - j_val) / max(j_val, 1.0)
    status = "Optimal" if gap <= limits.gap_tolerance else "TimeLimit"
    wall = time.perf_counter() - t0
    return SolveReport(
        schedule=inc_sched,
        objective=j_val,
        dual_bound=float(dual),
        status=status,
        nodes_explored=nodes,
        wall_time_s=wall,
        algorithm="exact",
        stats={"lp_iterations": lp_iters, "root_bound": root_bound, **model.stats()},
    )


def _has_sibling_pending(heap: list[_Node], parent: int) -> bool:
    return sum(1 for nd in heap if nd.parent == parent) > 0


def schedule_objective_from_model(model: MilpModel, x: np.ndarray) -> float:
    return round(model.objective_value(x), 6)
