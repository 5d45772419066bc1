"""Window-pruning heuristic and the FIFO baseline.

The heuristic groups observation windows of one satellite that follow each
other closer than the satellite's worst-case slew, keeps at most ``lambda``
windows per group and solves the reduced model exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .domain import (
    Download,
    Dtw,
    Instance,
    Observation,
    Otw,
    Satellite,
    Schedule,
    SolveReport,
    schedule_objective,
)
from .milp import build_model
from .solver.bnb import BnbLimits, solve_exact
from .validator import buffer_trajectory

__all__ = [
    "Cluster",
    "PrunedInstance",
    "max_slew_time",
    "cluster_windows",
    "lambda_lower_bound",
    "prune_clusters",
    "solve_heuristic",
    "solve_fifo",
]


@dataclass(frozen=True)
class Cluster:
    sat: str
    members: tuple[Otw, ...]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class PrunedInstance:
    """The original instance plus the set of observation windows kept."""

    instance: Instance
    retained: frozenset
    lam: int
    clusters: tuple[Cluster, ...] = ()
    opportunity: dict = field(default_factory=dict, compare=False)
    rescued: int = 0

    @property
    def removed(self) -> int:
        return len(self.instance.otws) - len(self.retained)

    def windows(self) -> tuple[Otw, ...]:
        return tuple(w for w in self.instance.otws if w.key in self.retained)


def max_slew_time(roll_limit_rad: float, pitch_limit_rad: float, slew_rate_rad_per_s: float) -> float:
    """Time to slew across the full roll and pitch ranges.

    Rounded to the nanosecond so that degree-valued limits converted to
    radians give whole seconds back instead of 119.99999999999999.
    """
    if slew_rate_rad_per_s <= 0:
        raise ValueError("slew rate must be positive")
    return round((2.0 * roll_limit_rad + 2.0 * pitch_limit_rad) / slew_rate_rad_per_s, 9)


def _sat_slew(sat: Satellite) -> float:
    return max_slew_time(sat.roll_limit_rad, sat.pitch_limit_rad, sat.slew_rate_rad_per_s)


def cluster_windows(inst: Instance) -> list[Cluster]:
    """Chains of windows on one satellite closer than its maximum slew time.

    Windows are swept in opening order; a window joins the open chain when
    it opens less than the maximum slew time after the latest close seen in
    that chain.  Chains of a single window are dropped.
    """
    out: list[Cluster] = []
    for sat in inst.satellites:
        limit = _sat_slew(sat)
        ws = sorted((w for w in inst.otws if w.sat == sat.id), key=lambda w: (w.t_open_s, w.key))
        cur: list[Otw] = []
        latest = -math.inf
        for w in ws:
            if cur and w.t_open_s - latest < limit:
                cur.append(w)
                latest = max(latest, w.t_close_s)
                continue
            if len(cur) > 1:
                out.append(Cluster(sat.id, tuple(cur)))
            cur, latest = [w], w.t_close_s
        if len(cur) > 1:
            out.append(Cluster(sat.id, tuple(cur)))
    return out


def lambda_lower_bound(inst: Instance) -> int:
    """Average window length over the time one observation occupies a satellite."""
    n_tw = len(inst.otws)
    if n_tw == 0 or not inst.tasks or not inst.satellites:
        raise ValueError("lambda lower bound needs windows, tasks and satellites")
    avg_len = sum(w.t_close_s - w.t_open_s for w in inst.otws) / n_tw
    tps = [tp for v in inst.tasks for tp in v.process_time_s.values()]
    if not tps:
        raise ValueError("lambda lower bound needs process times")
    avg_tp = sum(tps) / len(tps)
    avg_stab = sum(s.stab_time_s for s in inst.satellites) / len(inst.satellites)
    denom = avg_tp + avg_stab
    if denom <= 0:
        raise ValueError("zero denominator in lambda lower bound")
    return max(1, math.ceil(avg_len / denom - 1e-9))


def _rank_cluster(inst: Instance, cl: Cluster, op: dict[str, int]) -> list[Otw]:
    """Members in retention order: priority, then fewest opportunities, then roll closeness."""
    prio = {v.id: v.priority for v in inst.tasks}
    groups: dict[tuple[int, int], list[Otw]] = {}
    for w in cl.members:
        groups.setdefault((-prio[w.task], op[w.task]), []).append(w)
    ranked: list[Otw] = []
    for key in sorted(groups):
        pool = sorted(groups[key], key=lambda w: w.key)
        while pool:
            if ranked:
                mean = sum(w.roll_rad for w in ranked) / len(ranked)
                pick = min(pool, key=lambda w: (abs(w.roll_rad - mean), w.key))
            else:
                pick = pool[0]
            ranked.append(pick)
            pool.remove(pick)
    return ranked


def prune_clusters(inst: Instance, lam: int) -> PrunedInstance:
    """Keep the best ``lam`` windows of every cluster, never orphaning a task.

    The ranking inside each cluster depends only on the unpruned instance,
    so the windows kept for a smaller ``lam`` are always kept for a larger one.
    """
    if lam < 1:
        raise ValueError("lambda must be at least 1")
    clusters = cluster_windows(inst)
    op: dict[str, int] = {}
    for w in inst.otws:
        op[w.task] = op.get(w.task, 0) + 1
    retained = {w.key for w in inst.otws}
    position: dict[tuple, int] = {}
    for cl in clusters:
        ranked = _rank_cluster(inst, cl, op)
        for pos, w in enumerate(ranked):
            position[w.key] = pos
            if pos >= lam:
                retained.discard(w.key)
    rescued = 0
    kept_tasks = {k[0] for k in retained}
    for v in inst.tasks:
        if v.id in kept_tasks or op.get(v.id, 0) == 0:
            continue
        mine = [w for w in inst.otws if w.task == v.id]
        best = min(mine, key=lambda w: (position.get(w.key, -1), w.key))
        retained.add(best.key)
        rescued += 1
    return PrunedInstance(inst, frozenset(retained), lam, tuple(clusters), op, rescued)


def solve_heuristic(inst: Instance, lam: Optional[int] = None, limits: BnbLimits = BnbLimits()) -> SolveReport:
    """Prune clusters to ``lam`` windows (default: the lower bound) and solve exactly."""
    t0 = time.perf_counter()
    lam_v = lambda_lower_bound(inst) if lam is None else lam
    pr = prune_clusters(inst, lam_v)
    model = build_model(inst, keep=pr.retained)
    rep = solve_exact(model, limits)
    rep.algorithm = f"heuristic({lam_v})"
    rep.wall_time_s = time.perf_counter() - t0
    rep.stats.update(
        {
            "lambda": lam_v,
            "clusters": len(pr.clusters),
            "windows_retained": len(pr.retained),
            "windows_removed": pr.removed,
            "rescued": pr.rescued,
        }
    )
    return rep


# --------------------------------------------------------------------------
# FIFO baseline


@dataclass
class _Placed:
    task: str
    comp: int
    w: Otw
    t: float
    tp: float


class _Fifo:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.obs: list[_Placed] = []
        self.dls: list[Download] = []
        self.done: set[str] = set()

    # separation on one satellite
    def _trans(self, a_w: Otw, a_t: float, a_tp: float, b_w: Otw, b_t: float) -> float:
        sat = self.inst.sat_by_id[a_w.sat]
        dphi = abs(a_w.roll_rad - b_w.roll_rad)
        dth = abs(a_w.pitch_at(a_t) - b_w.pitch_at(b_t))
        return a_tp + sat.stab_time_s + (dphi + dth) / sat.slew_rate_rad_per_s

    def _fits(self, w: Otw, t: float, tp: float, others: list[_Placed]) -> bool:
        if t < w.t_open_s or t > w.t_close_s:
            return False
        for o in others:
            if o.w.sat != w.sat:
                continue
            after = t - o.t - self._trans(o.w, o.t, o.tp, w, t)
            before = o.t - t - self._trans(w, t, tp, o.w, o.t)
            if after < -1e-9 and before < -1e-9:
                return False
        return True

    def _candidates(self, w: Otw, tp: float, others: list[_Placed], extra: tuple[float, ...] = ()) -> list[float]:
        """Earliest-start candidates: the window opening and every separation boundary."""
        sat = self.inst.sat_by_id[w.sat]
        r = sat.slew_rate_rad_per_s
        c = w.pitch_at_open_rad - w.pitch_slope_rad_per_s * w.t_open_s
        s = w.pitch_slope_rad_per_s
        ts = [w.t_open_s, *extra]
        for o in others:
            if o.w.sat != w.sat:
                continue
            th_o = o.w.pitch_at(o.t)
            dphi = abs(o.w.roll_rad - w.roll_rad)
            for sg in (1.0, -1.0):
                # after o: t = o.t + o.tp + stab + (dphi + sg*(th_o - c - s t))/r
                den = 1.0 - sg * s / r
                if den != 0:
                    ts.append((o.t + o.tp + sat.stab_time_s + (dphi + sg * (th_o - c)) / r) / den)
                # before o: t + tp + stab + (dphi + sg*(c + s t - th_o))/r = o.t
                den = 1.0 + sg * s / r
                if den != 0:
                    ts.append((o.t - tp - sat.stab_time_s - (dphi + sg * (c - th_o)) / r) / den)
        ts = sorted({min(max(t, w.t_open_s), w.t_close_s) for t in ts})
        return ts

    def _storage_ok(self, extra: list[_Placed]) -> bool:
        sats = {p.w.sat for p in extra}
        trial = self._schedule(self.obs + extra)
        for sid in sats:
            sat = self.inst.sat_by_id[sid]
            traj = buffer_trajectory(self.inst, trial, sid)
            if max(v for _, v in traj.points) > sat.capacity_units + 1e-9:
                return False
        return True

    def _schedule(self, placed: list[_Placed]) -> Schedule:
        obs = tuple(Observation(p.task, p.comp, p.w.sat, p.w.index, p.t, p.w.pitch_at(p.t)) for p in placed)
        return Schedule(obs, tuple(self.dls))

    def place_mono(self, w: Otw, tp: float) -> None:
        for t in self._candidates(w, tp, self.obs):
            if self._fits(w, t, tp, self.obs):
                p = _Placed(w.task, 1, w, t, tp)
                if self._storage_ok([p]):
                    self.obs.append(p)
                    self.done.add(w.task)
                return

    def place_stereo(self, w: Otw, tp: float) -> None:
        inst = self.inst
        task = inst.task_by_id[w.task]
        beta = task.beta_rad
        later = sorted(
            (x for x in inst.otws if x.task == w.task and (x.t_open_s, x.key) >= (w.t_open_s, w.key)),
            key=lambda x: (x.t_open_s, x.key),
        )
        for t1 in self._candidates(w, tp, self.obs):
            if not self._fits(w, t1, tp, self.obs):
                continue
            p1 = _Placed(w.task, 1, w, t1, tp)
            with_first = self.obs + [p1]
            th1 = w.pitch_at(t1)
            for w2 in later:
                tp2 = inst.process_time(w2.task, w2.sat)
                s2 = w2.pitch_slope_rad_per_s
                c2 = w2.pitch_at_open_rad - s2 * w2.t_open_s
                edges = tuple((th1 + sg * beta - c2) / s2 for sg in (1.0, -1.0)) if s2 != 0 else ()
                for t2 in self._candidates(w2, tp2, with_first, edges):
                    if abs(th1 - w2.pitch_at(t2)) < beta - 1e-9:
                        continue
                    if not self._fits(w2, t2, tp2, with_first):
                        continue
                    p2 = _Placed(w.task, 2, w2, t2, tp2)
                    if self._storage_ok([p1, p2]):
                        self.obs += [p1, p2]
                        self.done.add(w.task)
                        return
                    break
            return

    def place_download(self, d: Dtw) -> None:
        inst = self.inst
        start = d.t_open_s
        for x in self.dls:
            xw = inst.dtw_by_key[x.dtw_key]
            if xw.station == d.station:
                start = max(start, x.t_end_s + inst.station_by_id[d.station].gs_prep_time_s)
            if x.sat == d.sat:
                start = max(start, x.t_end_s + inst.sat_by_id[d.sat].sat_prep_time_s)
        if start >= d.t_close_s:
            return
        sat = inst.sat_by_id[d.sat]
        traj = buffer_trajectory(inst, self._schedule(self.obs), d.sat)
        level = traj.level_at(start)
        dur = min(d.t_close_s - start, level / sat.down_rate_units_per_s)
        if dur > 1e-9:
            self.dls.append(Download(d.download, d.sat, d.index, start, start + dur))

    def run(self) -> Schedule:
        inst = self.inst
        events = [(w.t_open_s, 0, w.key, w) for w in inst.otws] + [(d.t_open_s, 1, d.key, d) for d in inst.dtws]
        events.sort(key=lambda e: (e[0], e[1], e[2]))
        for _, kind, _, item in events:
            if kind == 1:
                self.place_download(item)
                continue
            w = item
            if w.task in self.done:
                continue
            tp = inst.process_time(w.task, w.sat)
            if inst.task_by_id[w.task].stereo:
                self.place_stereo(w, tp)
            else:
                self.place_mono(w, tp)
        return self._schedule(self.obs)


def solve_fifo(inst: Instance) -> SolveReport:
    """Chronological greedy baseline: earliest feasible start in the earliest feasible window."""
    t0 = time.perf_counter()
    sch = _Fifo(inst).run()
    j = float(schedule_objective(inst, sch))
    return SolveReport(
        schedule=sch,
        objective=j,
        dual_bound=j,
        status="Feasible",
        nodes_explored=0,
        wall_time_s=time.perf_counter() - t0,
        algorithm="fifo",
    )
