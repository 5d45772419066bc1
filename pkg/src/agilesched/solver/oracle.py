"""Brute-force optimum for tiny instances.

The oracle never looks at the MILP.  It walks every selection of windows,
every observation order on each satellite, every stereo side and, where
storage can overflow, every download activation set, session order and
placement of session boundaries between observation ends.  Each leaf is a
small continuous feasibility problem handed to :func:`solve_lp`.

Storage uses the same event-based bookkeeping as the model: data counts as
downloaded once a session has finished, and as acquired for a session only
if the observation ended before the session started.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..domain import Download, Dtw, Instance, Observation, Otw, Schedule
from .lp import LpProblem, solve_lp


class OracleRefused(RuntimeError):
    """The instance is too large to enumerate within the caps."""


@dataclass(frozen=True)
class OracleCaps:
    max_tasks: int = 8
    max_windows_per_task: int = 4
    max_dtws: int = 4
    max_leaves: int = 1_000_000


@dataclass
class OracleResult:
    objective: int
    schedule: Schedule
    leaves: int


@dataclass(frozen=True)
class _Item:
    task: str
    comp: int
    w: Otw
    tp: float


class _Refuse(Exception):
    pass


class _Enumerator:
    def __init__(self, inst: Instance, caps: OracleCaps):
        self.inst = inst
        self.caps = caps
        self.leaves = 0
        self._cache: dict[tuple, Optional[Schedule]] = {}

    # -- leaf LP --------------------------------------------------------
    def _lp(self, items, orders, sides, dl=None):
        """Feasibility LP for fixed orders/sides; ``dl`` = (active, session order, positions)."""
        self.leaves += 1
        if self.leaves > self.caps.max_leaves:
            raise _Refuse()
        inst = self.inst
        n_obs = len(items)
        active: list[Dtw] = dl[0] if dl else []
        nv = n_obs + 2 * len(active)
        rows: list[tuple[dict[int, float], float, float]] = []  # (coefs, lo, hi)
        lb = np.zeros(nv)
        ub = np.zeros(nv)
        for k, it in enumerate(items):
            lb[k], ub[k] = it.w.t_open_s, it.w.t_close_s
        for q, d in enumerate(active):
            a, b = n_obs + 2 * q, n_obs + 2 * q + 1
            lb[a] = lb[b] = d.t_open_s
            ub[a] = ub[b] = d.t_close_s
            rows.append(({a: 1.0, b: -1.0}, -np.inf, 0.0))

        def pitch(k):  # theta_k = c + s * t_k
            w = items[k].w
            return w.pitch_at_open_rad - w.pitch_slope_rad_per_s * w.t_open_s, w.pitch_slope_rad_per_s

        # observation separation along each satellite's order
        for sat_id, seq in orders.items():
            sat = inst.sat_by_id[sat_id]
            r = sat.slew_rate_rad_per_s
            for x, y in itertools.combinations(seq, 2):
                ix, iy = items[x], items[y]
                ca, sa = pitch(x)
                cb, sb = pitch(y)
                dphi = abs(ix.w.roll_rad - iy.w.roll_rad)
                for sg in (1.0, -1.0):
                    # t_x + tp + stab + (dphi + sg*(th_x - th_y))/r - t_y <= 0
                    coef = {x: 1.0 + sg * sa / r}
                    coef[y] = coef.get(y, 0.0) - 1.0 - sg * sb / r
                    const = ix.tp + sat.stab_time_s + (dphi + sg * (ca - cb)) / r
                    rows.append((coef, -np.inf, -const))
        # stereo pitch separation on the chosen side
        for (k1, k2), sg in sides.items():
            c1, s1 = pitch(k1)
            c2, s2 = pitch(k2)
            beta = inst.task_by_id[items[k1].task].beta_rad
            rows.append(({k1: sg * s1, k2: -sg * s2}, beta - sg * (c1 - c2), np.inf))
        if dl:
            self._dl_rows(items, orders, dl, rows)
        A = np.zeros((len(rows), nv))
        lo = np.empty(len(rows))
        hi = np.empty(len(rows))
        for i, (coef, a, b) in enumerate(rows):
            for j, v in coef.items():
                A[i, j] += v
            lo[i], hi[i] = a, b
        res = solve_lp(LpProblem(np.zeros(nv), A, lo, hi, lb, ub))
        if res.status != "Optimal":
            return None
        return self._schedule(items, active, res.x)

    def _dl_rows(self, items, orders, dl, rows) -> None:
        inst = self.inst
        active, seq, pos = dl
        n_obs = len(items)
        idx = {d.key: q for q, d in enumerate(active)}

        def ta(d):
            return n_obs + 2 * idx[d.key]

        def tb(d):
            return n_obs + 2 * idx[d.key] + 1

        # session separation per station and per satellite, following the session order
        for a, b in itertools.combinations(seq, 2):
            gap = None
            if a.station == b.station:
                gap = inst.station_by_id[a.station].gs_prep_time_s
            if a.sat == b.sat:
                g2 = inst.sat_by_id[a.sat].sat_prep_time_s
                gap = g2 if gap is None else max(gap, g2)
            if gap is not None:
                rows.append(({tb(a): 1.0, ta(b): -1.0}, -np.inf, -gap))
        for sat_id, obs_seq in orders.items():
            sat = inst.sat_by_id[sat_id]
            if sat_id not in pos:
                continue
            mine = [d for d in seq if d.sat == sat_id]
            zeta, gamma = sat.acq_rate_units_per_s, sat.down_rate_units_per_s
            # boundary placement relative to the observation-end sequence
            for d in mine:
                pa, pb = pos[sat_id][d.key]
                for rank, k in enumerate(obs_seq):
                    if rank < pa:  # ended before the session starts
                        rows.append(({k: 1.0, ta(d): -1.0}, -np.inf, -items[k].tp))
                    if rank >= pb:  # session finished before this observation ends
                        rows.append(({tb(d): 1.0, k: -1.0}, -np.inf, items[k].tp))
            # level right after each observation end
            acquired = sat.initial_data_units
            for rank, k in enumerate(obs_seq):
                acquired += zeta * items[k].tp
                coef: dict[int, float] = {}
                for d in mine:
                    if pos[sat_id][d.key][1] <= rank:
                        coef[tb(d)] = coef.get(tb(d), 0.0) - gamma
                        coef[ta(d)] = coef.get(ta(d), 0.0) + gamma
                rows.append((coef, -np.inf, sat.capacity_units - acquired))
            # downloaded-so-far never exceeds data acquired before the session start
            for q, d in enumerate(mine):
                pa = pos[sat_id][d.key][0]
                acq = sat.initial_data_units + zeta * sum(items[k].tp for k in obs_seq[:pa])
                coef = {}
                for d2 in mine[: q + 1]:
                    coef[tb(d2)] = coef.get(tb(d2), 0.0) + gamma
                    coef[ta(d2)] = coef.get(ta(d2), 0.0) - gamma
                rows.append((coef, -np.inf, acq))

    def _schedule(self, items, active, x) -> Schedule:
        obs = []
        for k, it in enumerate(items):
            t = float(min(max(x[k], it.w.t_open_s), it.w.t_close_s))
            obs.append(Observation(it.task, it.comp, it.w.sat, it.w.index, t, it.w.pitch_at(t)))
        dls = []
        for q, d in enumerate(active):
            a, b = float(x[len(items) + 2 * q]), float(x[len(items) + 2 * q + 1])
            if b - a > 1e-9:
                dls.append(Download(d.download, d.sat, d.index, max(a, d.t_open_s), min(b, d.t_close_s)))
        return Schedule(tuple(obs), tuple(dls))

    # -- combinatorial layers -------------------------------------------
    def _orders(self, items, sat_id):
        """Observation orders on one satellite that survive a cheap earliest-start test."""
        sat = self.inst.sat_by_id[sat_id]
        mine = [k for k, it in enumerate(items) if it.w.sat == sat_id]
        out = []

        def rec(seq, rest, t_ready, prev):
            if not rest:
                out.append(tuple(seq))
                return
            for k in rest:
                it = items[k]
                start = it.w.t_open_s
                if prev is not None:
                    p = items[prev]
                    need = p.tp + sat.stab_time_s + abs(p.w.roll_rad - it.w.roll_rad) / sat.slew_rate_rad_per_s
                    start = max(start, t_ready + need)
                if start > it.w.t_close_s + 1e-9:
                    continue
                rec(seq + [k], [r for r in rest if r != k], start, k)

        rec([], mine, 0.0, None)
        return out

    def _sides(self, items):
        """Per stereo pair, the pitch-difference signs its windows allow."""
        pairs = {}
        for k1, it in enumerate(items):
            if it.comp != 1 or not self.inst.task_by_id[it.task].stereo:
                continue
            k2 = next(k for k, o in enumerate(items) if o.task == it.task and o.comp == 2)
            beta = self.inst.task_by_id[it.task].beta_rad
            w1, w2 = it.w, items[k2].w
            r1 = (min(w1.pitch_at_open_rad, w1.pitch_at_close_rad), max(w1.pitch_at_open_rad, w1.pitch_at_close_rad))
            r2 = (min(w2.pitch_at_open_rad, w2.pitch_at_close_rad), max(w2.pitch_at_open_rad, w2.pitch_at_close_rad))
            opts = []
            if r1[1] - r2[0] >= beta - 1e-12:
                opts.append(1.0)
            if r2[1] - r1[0] >= beta - 1e-12:
                opts.append(-1.0)
            pairs[(k1, k2)] = opts
        return pairs

    def _overflow_sats(self, items) -> list[str]:
        out = []
        for s in self.inst.satellites:
            tot = s.initial_data_units + s.acq_rate_units_per_s * sum(it.tp for it in items if it.w.sat == s.id)
            if tot > s.capacity_units:
                out.append(s.id)
        return out

    def feasible(self, items: tuple[_Item, ...], storage: bool) -> Optional[Schedule]:
        key = (items, storage)
        if key in self._cache:
            return self._cache[key]
        ans = self._feasible(list(items), storage)
        self._cache[key] = ans
        return ans

    def _feasible(self, items, storage: bool) -> Optional[Schedule]:
        over = self._overflow_sats(items) if storage else []
        # satellites interact only through cross-satellite stereo pairs and
        # through downloads; each coupled group is enumerated on its own
        parent = {it.w.sat: it.w.sat for it in items}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for it in items:
            if it.comp == 2:
                first = next(o for o in items if o.task == it.task and o.comp == 1)
                parent[find(it.w.sat)] = find(first.w.sat)
        for a, b in itertools.combinations(over, 2):
            parent[find(a)] = find(b)
        groups: dict[str, list[str]] = {}
        for sat in sorted(parent):
            groups.setdefault(find(sat), []).append(sat)
        obs: list[Observation] = []
        dls: list[Download] = []
        for sats in groups.values():
            sub = [it for it in items if it.w.sat in sats]
            sch = self._feasible_group(sub, sats, [s for s in over if s in sats])
            if sch is None:
                return None
            obs += sch.observations
            dls += sch.downloads
        return Schedule(tuple(obs), tuple(dls))

    def _feasible_group(self, items, sats, over) -> Optional[Schedule]:
        per_sat = [self._orders(items, s) for s in sats]
        if any(not o for o in per_sat):
            return None
        side_opts = self._sides(items)
        if any(not v for v in side_opts.values()):
            return None
        pair_keys = list(side_opts)
        for combo in itertools.product(*per_sat):
            orders = dict(zip(sats, combo))
            for sides in itertools.product(*(side_opts[k] for k in pair_keys)):
                sd = dict(zip(pair_keys, sides))
                sch = self._lp(items, orders, sd)
                if sch is None:
                    continue
                if not over:
                    return sch
                sch = self._with_downloads(items, orders, sd, over)
                if sch is not None:
                    return sch
        return None

    def _with_downloads(self, items, orders, sides, over) -> Optional[Schedule]:
        inst = self.inst
        for sat_id in over:
            sat = inst.sat_by_id[sat_id]
            data = sat.initial_data_units + sat.acq_rate_units_per_s * sum(it.tp for it in items if it.w.sat == sat_id)
            room = sat.down_rate_units_per_s * sum(d.t_close_s - d.t_open_s for d in inst.dtws if d.sat == sat_id)
            if data - room > sat.capacity_units:
                return None  # even downloading through every window cannot make room
        cands = [d for d in inst.dtws if d.sat in over]
        for r in range(1, len(cands) + 1):
            for active in itertools.combinations(cands, r):
                for seq in itertools.permutations(active):
                    for pos in self._positions(items, orders, list(seq), over):
                        sch = self._lp(items, orders, sides, (list(active), list(seq), pos))
                        if sch is not None:
                            return sch
        return None

    def _positions(self, items, orders, seq, over):
        """Placements of each session's start and end within its satellite's observation-end sequence.

        Placements the windows rule out are skipped, as are sessions that
        could carry no data or that finish after the last observation; such
        a session is no better than leaving it inactive, a case covered by
        a smaller activation set.
        """
        per: list[tuple[str, Dtw, list[tuple[int, int]]]] = []
        for d in seq:
            obs_seq = orders.get(d.sat, ())
            n = len(obs_seq)
            init = self.inst.sat_by_id[d.sat].initial_data_units
            ends = [(items[k].w.t_open_s + items[k].tp, items[k].w.t_close_s + items[k].tp) for k in obs_seq]
            ok = []
            for pa in range(n + 1):
                if pa == 0 and init <= 0:
                    continue
                if any(ends[r][0] > d.t_close_s for r in range(pa)):
                    break
                for pb in range(pa, n):
                    if all(d.t_open_s <= ends[r][1] for r in range(pb, n)):
                        ok.append((pa, pb))
            if not ok:
                return
            per.append((d.sat, d, ok))
        for choice in itertools.product(*(p[2] for p in per)):
            pos: dict[str, dict] = {}
            for (sat_id, d, _), c in zip(per, choice):
                pos.setdefault(sat_id, {})[d.key] = c
            for s in over:
                pos.setdefault(s, {})
            yield pos

    # -- selection search -----------------------------------------------
    def run(self) -> OracleResult:
        inst = self.inst
        tasks = sorted(inst.tasks, key=lambda v: (-v.priority, v.id))
        options: list[list[tuple[_Item, ...]]] = []
        for v in tasks:
            ws = [w for w in inst.otws if w.task == v.id]
            opts = []
            if v.stereo:
                for a in range(len(ws)):
                    for b in range(a, len(ws)):
                        opts.append(
                            (
                                _Item(v.id, 1, ws[a], inst.process_time(v.id, ws[a].sat)),
                                _Item(v.id, 2, ws[b], inst.process_time(v.id, ws[b].sat)),
                            )
                        )
            else:
                opts = [(_Item(v.id, 1, w, inst.process_time(v.id, w.sat)),) for w in ws]
            options.append(opts)
        suffix = [0] * (len(tasks) + 1)
        for i in range(len(tasks) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + (tasks[i].priority if options[i] else 0)
        best = [0, Schedule()]

        def rec(i: int, chosen: tuple[_Item, ...], value: int) -> None:
            if value + suffix[i] <= best[0]:
                return
            if i == len(tasks):
                return
            for opt in options[i]:
                sel = tuple(sorted(chosen + opt, key=lambda it: (it.task, it.comp, it.w.key)))
                # separation, windows and stereo only ever get harder as tasks are added
                if self.feasible(sel, storage=False) is None:
                    continue
                val = value + tasks[i].priority
                if val > best[0]:
                    sch = self.feasible(sel, storage=True)
                    if sch is not None:
                        best[0], best[1] = val, sch
                rec(i + 1, sel, val)
            rec(i + 1, chosen, value)

        rec(0, (), 0)
        return OracleResult(best[0], best[1], self.leaves)


def enumerate_oracle(inst: Instance, caps: OracleCaps = OracleCaps()) -> OracleResult:
    """Optimal objective of a tiny instance by exhaustive enumeration.

    Raises :class:`OracleRefused` when the instance exceeds ``caps``; the
    search is never truncated silently.
    """
    if len(inst.tasks) > caps.max_tasks:
        raise OracleRefused(f"{len(inst.tasks)} tasks exceed the cap of {caps.max_tasks}")
    per_task: dict[str, int] = {}
    for w in inst.otws:
        per_task[w.task] = per_task.get(w.task, 0) + 1
    if per_task and max(per_task.values()) > caps.max_windows_per_task:
        raise OracleRefused(f"a task has more than {caps.max_windows_per_task} windows")
    if len(inst.dtws) > caps.max_dtws:
        raise OracleRefused(f"{len(inst.dtws)} download windows exceed the cap of {caps.max_dtws}")
    en = _Enumerator(inst, caps)
    try:
        return en.run()
    except _Refuse:
        raise OracleRefused(f"more than {caps.max_leaves} leaf problems") from None
