"""Mixed-integer linear model of the scheduling problem.

The builder turns an :class:`~agilesched.domain.Instance` into a generic
:class:`MilpModel` (variables, sparse rows, objective) plus the semantic
bookkeeping needed to map a solution back to a :class:`Schedule`.

Disjunctions are linearized with big-M rows.  Every big-M is the exact
maximum of the guarded expression over the variables' boxes, and every
same-satellite window pair is classified before emission: pairs whose order
is forced by time get no binary, pairs that can never coexist get a
conflict row.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .domain import Download, Dtw, Instance, Observation, Otw, Schedule

__all__ = [
    "MilpModel",
    "Slot",
    "DlVar",
    "build_model",
    "export_lp",
    "import_lp",
    "extract_schedule",
    "AssignmentError",
]

NAME_MAX = 64
INT_TOL = 1e-6
ROW_TOL = 1e-6


def q12(x: float) -> float:
    """Round to 12 significant digits, the precision of the LP text format."""
    return float(f"{x:.12g}")


class AssignmentError(ValueError):
    """A variable assignment is not integral or violates a model row."""


@dataclass
class Slot:
    """One possible observation: task component ``comp`` in window ``otw``."""

    task: str
    comp: int
    otw: Otw
    x: int
    t: int
    th: int
    tp: float

    @property
    def sat(self) -> str:
        return self.otw.sat

    @property
    def label(self) -> str:
        return f"{self.task}#{self.comp}@{self.otw.sat}/{self.otw.index}"


@dataclass
class DlVar:
    dtw: Dtw
    z: int
    ta: int
    tb: int


@dataclass
class MilpModel:
    """A maximization MILP with named variables and sparse rows."""

    name: str = "model"
    var_names: list[str] = field(default_factory=list)
    var_kind: list[str] = field(default_factory=list)  # "B" | "C"
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    obj: dict[int, float] = field(default_factory=dict)
    row_names: list[str] = field(default_factory=list)
    row_idx: list[list[int]] = field(default_factory=list)
    row_val: list[list[float]] = field(default_factory=list)
    row_sense: list[str] = field(default_factory=list)  # "<=" | "=" | ">="
    row_rhs: list[float] = field(default_factory=list)
    # semantic map: variable name -> entity tuple
    semantic: dict[str, tuple] = field(default_factory=dict)
    slots: list[Slot] = field(default_factory=list)
    dls: list[DlVar] = field(default_factory=list)
    task_vars: dict[str, tuple[int, Optional[int]]] = field(default_factory=dict)
    priorities: dict[str, int] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    # -- construction -------------------------------------------------
    def add_var(self, name: str, kind: str, lb: float, ub: float, entity: tuple = (), obj: float = 0.0) -> int:
        if len(name) > NAME_MAX:
            raise ValueError(f"variable name longer than {NAME_MAX} chars: {name}")
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if not (math.isfinite(lb) and math.isfinite(ub)):
            raise ValueError(f"variable {name} needs finite bounds")
        j = len(self.var_names)
        self._index[name] = j
        self.var_names.append(name)
        self.var_kind.append(kind)
        self.lb.append(q12(lb))
        self.ub.append(q12(ub))
        if obj:
            self.obj[j] = q12(obj)
        if entity:
            self.semantic[name] = entity
        return j

    def add_row(self, name: str, terms: Iterable[tuple[int, float]], sense: str, rhs: float) -> int:
        acc: dict[int, float] = {}
        for j, a in terms:
            acc[j] = acc.get(j, 0.0) + a
        idx = sorted(j for j, a in acc.items() if a != 0.0)
        self.row_names.append(name)
        self.row_idx.append(idx)
        self.row_val.append([q12(acc[j]) for j in idx])
        self.row_sense.append(sense)
        self.row_rhs.append(q12(rhs))
        return len(self.row_names) - 1

    def var(self, name: str) -> int:
        return self._index[name]

    # -- queries -------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    @property
    def binaries(self) -> list[int]:
        return [j for j, k in enumerate(self.var_kind) if k == "B"]

    def objective_value(self, x: Sequence[float]) -> float:
        return sum(c * x[j] for j, c in self.obj.items())

    def row_activity(self, i: int, x: Sequence[float]) -> float:
        return sum(a * x[j] for j, a in zip(self.row_idx[i], self.row_val[i]))

    def violated_rows(self, x: Sequence[float], tol: float = ROW_TOL) -> list[tuple[str, float]]:
        out = []
        for i in range(self.n_rows):
            act = self.row_activity(i, x)
            rhs = self.row_rhs[i]
            s = self.row_sense[i]
            viol = act - rhs if s == "<=" else rhs - act if s == ">=" else abs(act - rhs)
            if viol > tol:
                out.append((self.row_names[i], viol))
        return out

    def same_algebra(self, other: "MilpModel") -> bool:
        """Equality of everything the LP text format carries."""
        return (
            self.var_names == other.var_names
            and self.var_kind == other.var_kind
            and self.lb == other.lb
            and self.ub == other.ub
            and {j: c for j, c in self.obj.items() if c} == {j: c for j, c in other.obj.items() if c}
            and self.row_names == other.row_names
            and self.row_idx == other.row_idx
            and self.row_val == other.row_val
            and self.row_sense == other.row_sense
            and self.row_rhs == other.row_rhs
        )

    def stats(self) -> dict[str, int]:
        return {
            "variables": self.n_vars,
            "binaries": len(self.binaries),
            "rows": self.n_rows,
            "nonzeros": sum(len(r) for r in self.row_idx),
        }


# --------------------------------------------------------------------------
# Pair geometry


def _pitch_line(w: Otw) -> tuple[float, float]:
    """Pitch as ``c + s * t`` in absolute time."""
    return w.pitch_at_open_rad - w.pitch_slope_rad_per_s * w.t_open_s, w.pitch_slope_rad_per_s


def _box_corners(wi: Otw, wj: Otw):
    for ti in (wi.t_open_s, wi.t_close_s):
        for tj in (wj.t_open_s, wj.t_close_s):
            yield ti, tj


def _kink_points(wi: Otw, wj: Otw):
    """Points on the box edges where the two pitch lines are equal."""
    ci, si = _pitch_line(wi)
    cj, sj = _pitch_line(wj)
    pts = []
    for ti in (wi.t_open_s, wi.t_close_s):
        if sj != 0:
            tj = (ci + si * ti - cj) / sj
            if wj.t_open_s <= tj <= wj.t_close_s:
                pts.append((ti, tj))
    for tj in (wj.t_open_s, wj.t_close_s):
        if si != 0:
            ti = (cj + sj * tj - ci) / si
            if wi.t_open_s <= ti <= wi.t_close_s:
                pts.append((ti, tj))
    return pts


def _sep_slack(i: Slot, j: Slot, ti: float, tj: float, stab: float, rate: float) -> float:
    """``t_j - t_i`` minus the transition required when ``i`` precedes ``j``."""
    dphi = abs(i.otw.roll_rad - j.otw.roll_rad)
    dth = abs(i.otw.pitch_at(ti) - j.otw.pitch_at(tj))
    return tj - ti - (i.tp + stab + (dphi + dth) / rate)


def _order_range(i: Slot, j: Slot, stab: float, rate: float) -> tuple[float, float]:
    """(min, max) of the i-before-j slack over both windows; the slack is concave."""
    corners = [_sep_slack(i, j, a, b, stab, rate) for a, b in _box_corners(i.otw, j.otw)]
    kinks = [_sep_slack(i, j, a, b, stab, rate) for a, b in _kink_points(i.otw, j.otw)]
    return min(corners), max(corners + kinks)


def _lin_range(terms: Sequence[tuple[float, float, float]], const: float) -> tuple[float, float]:
    """Range of ``const + sum(a * v)`` for ``v`` in ``[lo, hi]`` given (a, lo, hi) triples."""
    lo = hi = const
    for a, vlo, vhi in terms:
        lo += min(a * vlo, a * vhi)
        hi += max(a * vlo, a * vhi)
    return lo, hi


# --------------------------------------------------------------------------
# Builder


class _Builder:
    def __init__(self, inst: Instance, keep: Optional[set] = None, name: str = "model"):
        self.inst = inst
        self.m = MilpModel(name=name)
        self.keep = keep
        self.otws = [w for w in inst.otws if keep is None or w.key in keep]

    # naming helpers
    @staticmethod
    def _sfx(comp: int) -> str:
        return "" if comp == 1 else "2"

    def build(self) -> MilpModel:
        m, inst = self.m, self.inst
        for v in inst.tasks:
            m.priorities[v.id] = v.priority
        self._task_vars()
        self._slot_vars()
        self._dl_vars()
        self._assignment_rows()
        self._download_rows()
        self._obs_separation()
        self._dl_separation()
        self._capacity()
        self._stereo()
        return m

    def _task_vars(self) -> None:
        m = self.m
        for v in self.inst.tasks:
            xv = m.add_var(f"x_{v.id}", "B", 0, 1, ("x_v", v.id), obj=v.priority)
            xs = m.add_var(f"xs_{v.id}", "B", 0, 1, ("x_vs_stereo", v.id)) if v.stereo else None
            m.task_vars[v.id] = (xv, xs)

    def _slot_vars(self) -> None:
        m, inst = self.m, self.inst
        self.slots_by_vcs: dict[tuple[str, int, str], list[Slot]] = {}
        for w in self.otws:
            task = inst.task_by_id[w.task]
            tp = inst.process_time(w.task, w.sat)
            for comp in range(1, task.n_components + 1):
                sfx = self._sfx(comp)
                base = f"{w.task}_{w.sat}_{w.index}"
                x = m.add_var(f"x{sfx}_{base}", "B", 0, 1, ("x_vsk", w.task, comp, w.sat, w.index))
                t = m.add_var(f"t{sfx}_{base}", "C", w.t_open_s, w.t_close_s, ("t_vsk", w.task, comp, w.sat, w.index))
                p_lo = min(w.pitch_at_open_rad, w.pitch_at_close_rad)
                p_hi = max(w.pitch_at_open_rad, w.pitch_at_close_rad)
                th = m.add_var(f"th{sfx}_{base}", "C", p_lo, p_hi, ("theta_vsk", w.task, comp, w.sat, w.index))
                slot = Slot(w.task, comp, w, x, t, th, tp)
                m.slots.append(slot)
                self.slots_by_vcs.setdefault((w.task, comp, w.sat), []).append(slot)
                # pitch linked to start time by the window's linear model
                c, s = _pitch_line(w)
                m.add_row(f"pitch_{sfx}{base}", [(th, 1.0), (t, -s)], "=", c)

    def _dl_vars(self) -> None:
        m = self.m
        for w in self.inst.dtws:
            base = f"{w.download}_{w.sat}_{w.index}"
            z = m.add_var(f"z_{base}", "B", 0, 1, ("z_dsl", w.download, w.sat, w.index))
            ta = m.add_var(f"ta_{base}", "C", w.t_open_s, w.t_close_s, ("t_a_dsl", w.download, w.sat, w.index))
            tb = m.add_var(f"tb_{base}", "C", w.t_open_s, w.t_close_s, ("t_b_dsl", w.download, w.sat, w.index))
            m.dls.append(DlVar(w, z, ta, tb))

    def _assignment_rows(self) -> None:
        m, inst = self.m, self.inst
        for v in inst.tasks:
            xv, xs = m.task_vars[v.id]
            for comp, top in ((1, xv), (2, xs)):
                if top is None:
                    continue
                sfx = self._sfx(comp)
                terms = []
                for s in inst.satellites:
                    slots = self.slots_by_vcs.get((v.id, comp, s.id))
                    if not slots:
                        continue
                    xvs = m.add_var(f"xvs{sfx}_{v.id}_{s.id}", "B", 0, 1, ("x_vs", v.id, comp, s.id))
                    m.add_row(f"assign{sfx}_{v.id}_{s.id}", [(xvs, 1.0)] + [(sl.x, -1.0) for sl in slots], "=", 0.0)
                    terms.append((xvs, -1.0))
                m.add_row(f"select{sfx}_{v.id}", [(top, 1.0)] + terms, "=", 0.0)
            if v.stereo:
                m.add_row(f"stereo_pair_{v.id}", [(xv, 1.0), (xs, -1.0)], "=", 0.0)
                # components are interchangeable: the second may not use an earlier window
                s1 = [sl for sl in m.slots if sl.task == v.id and sl.comp == 1]
                s2 = [sl for sl in m.slots if sl.task == v.id and sl.comp == 2]
                for p, sl in enumerate(s2):
                    terms = [(sl.x, 1.0)] + [(a.x, -1.0) for a in s1[: p + 1]]
                    m.add_row(f"stereo_sym_{v.id}_{p}", terms, "<=", 0.0)

    def _download_rows(self) -> None:
        m = self.m
        for d in m.dls:
            w = d.dtw
            base = f"{w.download}_{w.sat}_{w.index}"
            span = w.t_close_s - w.t_open_s
            m.add_row(f"dl_order_{base}", [(d.ta, 1.0), (d.tb, -1.0)], "<=", 0.0)
            # inactive sessions collapse to zero length at the window opening
            m.add_row(f"dl_pin_a_{base}", [(d.ta, 1.0), (d.z, -span)], "<=", w.t_open_s)
            m.add_row(f"dl_pin_b_{base}", [(d.tb, 1.0), (d.z, -span)], "<=", w.t_open_s)

    # -- observation separation ---------------------------------------
    def _obs_separation(self) -> None:
        m, inst = self.m, self.inst
        self.obs_order: dict[tuple[int, int], object] = {}
        by_sat: dict[str, list[int]] = {}
        for n, sl in enumerate(m.slots):
            by_sat.setdefault(sl.sat, []).append(n)
        for sat_id, members in by_sat.items():
            sat = inst.sat_by_id[sat_id]
            stab, rate = sat.stab_time_s, sat.slew_rate_rad_per_s
            for a, b in itertools.combinations(members, 2):
                i, j = m.slots[a], m.slots[b]
                if i.task == j.task and i.comp == j.comp:
                    continue  # mutually exclusive through the assignment rows
                min_ij, max_ij = _order_range(i, j, stab, rate)
                min_ji, max_ji = _order_range(j, i, stab, rate)
                if min_ij >= 0:
                    self.obs_order[(a, b)] = "before"
                    continue
                if min_ji >= 0:
                    self.obs_order[(a, b)] = "after"
                    continue
                can_ij, can_ji = max_ij >= 0, max_ji >= 0
                if i.task == j.task and i.otw.key == j.otw.key:
                    # two stereo components in one window: label the earlier one first
                    can_ji = can_ji and i.comp == 2
                    can_ij = can_ij and i.comp == 1
                if not can_ij and not can_ji:
                    m.add_row(f"conflict_{a}_{b}", [(i.x, 1.0), (j.x, 1.0)], "<=", 1.0)
                    self.obs_order[(a, b)] = "conflict"
                elif can_ij and not can_ji:
                    self._sep_rows(a, b, None, stab, rate)
                    self.obs_order[(a, b)] = "before"
                elif can_ji and not can_ij:
                    self._sep_rows(b, a, None, stab, rate)
                    self.obs_order[(a, b)] = "after"
                else:
                    y = m.add_var(f"yo_{a}_{b}", "B", 0, 1, ("order_obs", i.label, j.label))
                    self._sep_rows(a, b, (y, 1), stab, rate)
                    self._sep_rows(b, a, (y, 0), stab, rate)
                    self.obs_order[(a, b)] = y

    def _sep_rows(self, a: int, b: int, ctl: Optional[tuple[int, int]], stab: float, rate: float) -> None:
        """Rows for 'slot a precedes slot b', active when both are selected (and y == ctl value)."""
        m = self.m
        i, j = m.slots[a], m.slots[b]
        ci, si = _pitch_line(i.otw)
        cj, sj = _pitch_line(j.otw)
        dphi = abs(i.otw.roll_rad - j.otw.roll_rad)
        for sgn, tag in ((1.0, "p"), (-1.0, "m")):
            # t_i + Tp + stab + (dphi + sgn*(th_i - th_j))/r <= t_j
            ai = 1.0 + sgn * si / rate
            aj = -(1.0 + sgn * sj / rate)
            const = i.tp + stab + (dphi + sgn * (ci - cj)) / rate
            _, hi = _lin_range(
                [(ai, i.otw.t_open_s, i.otw.t_close_s), (aj, j.otw.t_open_s, j.otw.t_close_s)], const
            )
            M = max(0.0, hi)
            terms = [(i.t, ai), (j.t, aj), (i.x, M), (j.x, M)]
            rhs = 2 * M - const
            if ctl is not None:
                y, val = ctl
                if val == 1:
                    terms.append((y, M))
                    rhs += M
                else:
                    terms.append((y, -M))
            m.add_row(f"sep{tag}_{a}_{b}", terms, "<=", rhs)

    # -- download separation -----------------------------------------
    def _dl_separation(self) -> None:
        m, inst = self.m, self.inst
        self.dl_order: dict[tuple[int, int], object] = {}
        for a, b in itertools.combinations(range(len(m.dls)), 2):
            da, db = m.dls[a], m.dls[b]
            wa, wb = da.dtw, db.dtw
            gap = 0.0
            fams = []
            if wa.station == wb.station:
                gap = max(gap, inst.station_by_id[wa.station].gs_prep_time_s)
                fams.append("gs")
            if wa.sat == wb.sat:
                gap = max(gap, inst.sat_by_id[wa.sat].sat_prep_time_s)
                fams.append("sat")
            if not fams:
                continue
            # a before b: tb_a + gap <= ta_b
            always_ab = wa.t_close_s + gap <= wb.t_open_s
            always_ba = wb.t_close_s + gap <= wa.t_open_s
            if always_ab:
                self.dl_order[(a, b)] = "before"
                continue
            if always_ba:
                self.dl_order[(a, b)] = "after"
                continue
            can_ab = wa.t_open_s + gap <= wb.t_close_s
            can_ba = wb.t_open_s + gap <= wa.t_close_s
            tag = "_".join(fams)
            if not can_ab and not can_ba:
                m.add_row(f"dlconflict_{a}_{b}", [(da.z, 1.0), (db.z, 1.0)], "<=", 1.0)
                self.dl_order[(a, b)] = "conflict"
            elif can_ab and not can_ba:
                self._dl_sep_rows(a, b, gap, None, tag)
                self.dl_order[(a, b)] = "before"
            elif can_ba and not can_ab:
                self._dl_sep_rows(b, a, gap, None, tag)
                self.dl_order[(a, b)] = "after"
            else:
                y = m.add_var(f"yd_{a}_{b}", "B", 0, 1, ("order_dl", tag, wa.key, wb.key))
                self._dl_sep_rows(a, b, gap, (y, 1), tag)
                self._dl_sep_rows(b, a, gap, (y, 0), tag)
                self.dl_order[(a, b)] = y

    def _dl_sep_rows(self, a: int, b: int, gap: float, ctl, tag: str) -> None:
        m = self.m
        da, db = m.dls[a], m.dls[b]
        # tb_a + gap - ta_b <= 0 when both active
        M = max(0.0, da.dtw.t_close_s + gap - db.dtw.t_open_s)
        terms = [(da.tb, 1.0), (db.ta, -1.0), (da.z, M), (db.z, M)]
        rhs = 2 * M - gap
        if ctl is not None:
            y, val = ctl
            if val == 1:
                terms.append((y, M))
                rhs += M
            else:
                terms.append((y, -M))
        m.add_row(f"dlsep_{tag}_{a}_{b}", terms, "<=", rhs)

    # -- onboard data ---------------------------------------------------
    def _capacity(self) -> None:
        m, inst = self.m, self.inst
        for sat in inst.satellites:
            slots = [n for n, sl in enumerate(m.slots) if sl.sat == sat.id]
            dls = [n for n, d in enumerate(m.dls) if d.dtw.sat == sat.id]
            zeta, gamma = sat.acq_rate_units_per_s, sat.down_rate_units_per_s
            total = sat.initial_data_units + zeta * sum(m.slots[n].tp for n in slots)
            if total <= sat.capacity_units:
                continue  # storage can never overflow on this satellite
            # download-completed-before-observation-end credits
            credit_w: dict[tuple[int, int], object] = {}
            # observation-ended-before-download-start credits
            credit_a: dict[tuple[int, int], object] = {}
            for n in slots:
                sl = m.slots[n]
                end_lo = sl.otw.t_open_s + sl.tp
                end_hi = sl.otw.t_close_s + sl.tp
                for l in dls:
                    d = m.dls[l]
                    w = d.dtw
                    span = w.t_close_s - w.t_open_s
                    if w.t_close_s <= end_lo:
                        credit_w[(n, l)] = "always"
                    elif w.t_open_s <= end_hi:
                        q = m.add_var(f"q_{n}_{l}", "B", 0, 1, ("dl_before_obs_end", sl.label, w.key))
                        wv = m.add_var(f"w_{n}_{l}", "C", 0, span, ("credited_dl_time", sl.label, w.key))
                        # tb_l <= t_n + Tp when q = 1
                        M = max(0.0, w.t_close_s - end_lo)
                        m.add_row(f"qord_{n}_{l}", [(d.tb, 1.0), (sl.t, -1.0), (q, M)], "<=", sl.tp + M)
                        m.add_row(f"wdur_{n}_{l}", [(wv, 1.0), (d.tb, -1.0), (d.ta, 1.0)], "<=", 0.0)
                        m.add_row(f"wq_{n}_{l}", [(wv, 1.0), (q, -span)], "<=", 0.0)
                        credit_w[(n, l)] = wv
                    if end_hi <= w.t_open_s:
                        credit_a[(n, l)] = "always"
                    elif end_lo <= w.t_close_s:
                        av = m.add_var(f"a_{n}_{l}", "B", 0, 1, ("obs_end_before_dl", sl.label, w.key))
                        M = max(0.0, end_hi - w.t_open_s)
                        m.add_row(f"aord_{n}_{l}", [(sl.t, 1.0), (d.ta, -1.0), (av, M)], "<=", M - sl.tp)
                        m.add_row(f"ax_{n}_{l}", [(av, 1.0), (sl.x, -1.0)], "<=", 0.0)
                        credit_a[(n, l)] = av
            mcap = total - sat.capacity_units
            # level right after each observation ends
            for n in slots:
                sl = m.slots[n]
                terms = [(sl.x, zeta * sl.tp + mcap)]
                for n2 in slots:
                    if n2 == n:
                        continue
                    j = m.slots[n2]
                    coef = zeta * j.tp
                    rel = self._obs_rel(n2, n)
                    if rel == "before":
                        terms.append((j.x, coef))
                    elif isinstance(rel, tuple):
                        y, val = rel
                        c = m.add_var(f"c_{n2}_{n}", "C", 0, 1, ("obs_before_obs", j.label, sl.label))
                        # c >= x_j + [j before n] - 1
                        if val == 1:
                            m.add_row(f"cprod_{n2}_{n}", [(c, 1.0), (j.x, -1.0), (y, -1.0)], ">=", -1.0)
                        else:
                            m.add_row(f"cprod_{n2}_{n}", [(c, 1.0), (j.x, -1.0), (y, 1.0)], ">=", 0.0)
                        terms.append((c, coef))
                for l in dls:
                    cw = credit_w.get((n, l))
                    d = m.dls[l]
                    if cw == "always":
                        terms += [(d.tb, -gamma), (d.ta, gamma)]
                    elif cw is not None:
                        terms.append((cw, -gamma))
                m.add_row(f"cap_{n}", terms, "<=", sat.capacity_units - sat.initial_data_units + mcap)
            # level at each download end must stay non-negative
            for l in dls:
                d = m.dls[l]
                terms = [(d.tb, gamma), (d.ta, -gamma)]
                for l2 in dls:
                    if l2 == l:
                        continue
                    d2 = m.dls[l2]
                    rel = self._dl_rel(l2, l)
                    if rel == "before":
                        terms += [(d2.tb, gamma), (d2.ta, -gamma)]
                    elif isinstance(rel, tuple):
                        y, val = rel
                        span2 = d2.dtw.t_close_s - d2.dtw.t_open_s
                        e = m.add_var(f"e_{l2}_{l}", "C", 0, span2, ("dl_before_dl", d2.dtw.key, d.dtw.key))
                        # e >= dur_l2 - span2 * (1 - [l2 before l])
                        if val == 1:
                            m.add_row(f"eprod_{l2}_{l}", [(e, 1.0), (d2.tb, -1.0), (d2.ta, 1.0), (y, -span2)], ">=", -span2)
                        else:
                            m.add_row(f"eprod_{l2}_{l}", [(e, 1.0), (d2.tb, -1.0), (d2.ta, 1.0), (y, span2)], ">=", 0.0)
                        terms.append((e, gamma))
                for n in slots:
                    ca = credit_a.get((n, l))
                    sl = m.slots[n]
                    if ca == "always":
                        terms.append((sl.x, -zeta * sl.tp))
                    elif ca is not None:
                        terms.append((ca, -zeta * sl.tp))
                m.add_row(f"nonneg_{l}", terms, "<=", sat.initial_data_units)

    @staticmethod
    def _rel(table: dict, j: int, i: int):
        """How ``j`` sits before ``i``: "before", "never" or (y, y-value meaning j first)."""
        lo = min(i, j)
        rel = table.get((lo, max(i, j)))
        if rel is None or rel == "conflict":
            return "never"
        if isinstance(rel, int):
            return (rel, 1) if j == lo else (rel, 0)
        low_first = rel == "before"
        return "before" if (j == lo) == low_first else "never"

    def _obs_rel(self, j: int, i: int):
        return self._rel(self.obs_order, j, i)

    def _dl_rel(self, l2: int, l: int):
        return self._rel(self.dl_order, l2, l)

    # -- stereo -----------------------------------------------------------
    def _stereo(self) -> None:
        m, inst = self.m, self.inst
        for v in inst.tasks:
            if not v.stereo:
                continue
            beta = v.beta_rad
            s1 = [(n, sl) for n, sl in enumerate(m.slots) if sl.task == v.id and sl.comp == 1]
            s2 = [(n, sl) for n, sl in enumerate(m.slots) if sl.task == v.id and sl.comp == 2]
            pos = {sl.otw.key: p for p, (_, sl) in enumerate(s1)}
            for (a, i), (b, j) in itertools.product(s1, s2):
                if pos[j.otw.key] < pos[i.otw.key]:
                    continue  # excluded by the symmetry rows
                lo_i, hi_i = m.lb[i.th], m.ub[i.th]
                lo_j, hi_j = m.lb[j.th], m.ub[j.th]
                # side +: th_i - th_j >= beta ; side -: th_j - th_i >= beta
                d_min, d_max = lo_i - hi_j, hi_i - lo_j
                if d_min >= beta or -d_max >= beta:
                    continue
                can_p, can_m = d_max >= beta, -d_min >= beta
                if not can_p and not can_m:
                    m.add_row(f"stconflict_{a}_{b}", [(i.x, 1.0), (j.x, 1.0)], "<=", 1.0)
                    continue
                y = None
                if can_p and can_m:
                    y = m.add_var(f"ys_{a}_{b}", "B", 0, 1, ("stereo_side", v.id, i.label, j.label))
                for sgn, ok, val in ((1.0, can_p, 1), (-1.0, can_m, 0)):
                    if not ok:
                        continue
                    # sgn*(th_i - th_j) >= beta, relaxed by M per inactive guard
                    M = beta - (d_min if sgn > 0 else -d_max)
                    terms = [(i.th, sgn), (j.th, -sgn), (i.x, -M), (j.x, -M)]
                    rhs = beta - 2 * M
                    if y is not None:
                        if val == 1:
                            terms.append((y, -M))
                            rhs -= M
                        else:
                            terms.append((y, M))
                    m.add_row(f"stereo{'p' if sgn > 0 else 'm'}_{a}_{b}", terms, ">=", rhs)


def build_model(inst: Instance, keep: Optional[Iterable[tuple[str, str, int]]] = None, name: str = "model") -> MilpModel:
    """Build the scheduling MILP; ``keep`` restricts the usable observation windows."""
    keep_set = set(keep) if keep is not None else None
    return _Builder(inst, keep_set, name).build()


# --------------------------------------------------------------------------
# Solution mapping


def extract_schedule(model: MilpModel, values: Sequence[float]) -> Schedule:
    """Schedule encoded by an integral, row-feasible assignment."""
    x = list(values)
    if len(x) != model.n_vars:
        raise AssignmentError(f"assignment has {len(x)} values, model has {model.n_vars} variables")
    for j in model.binaries:
        if abs(x[j] - round(x[j])) > INT_TOL:
            raise AssignmentError(f"binary {model.var_names[j]} not integral: {x[j]}")
    for j in range(model.n_vars):
        if x[j] < model.lb[j] - ROW_TOL or x[j] > model.ub[j] + ROW_TOL:
            raise AssignmentError(f"variable {model.var_names[j]} out of bounds: {x[j]}")
    bad = model.violated_rows(x)
    if bad:
        name, viol = max(bad, key=lambda r: r[1])
        raise AssignmentError(f"row {name} violated by {viol:.6g}")
    obs = []
    for sl in model.slots:
        if round(x[sl.x]) == 1:
            w = sl.otw
            t = min(max(x[sl.t], w.t_open_s), w.t_close_s)
            obs.append(Observation(sl.task, sl.comp, w.sat, w.index, t, w.pitch_at(t)))
    dls = []
    for d in model.dls:
        ta, tb = x[d.ta], x[d.tb]
        if round(x[d.z]) == 1 and tb - ta > 1e-9:
            w = d.dtw
            dls.append(Download(w.download, w.sat, w.index, max(ta, w.t_open_s), min(tb, w.t_close_s)))
    return Schedule(tuple(obs), tuple(dls))


def assignment_objective(model: MilpModel, values: Sequence[float]) -> float:
    return float(round(model.objective_value(values), 6))


# --------------------------------------------------------------------------
# LP text format


def _num(x: float) -> str:
    return f"{x:.12g}"


def export_lp(model: MilpModel) -> str:
    """Solver-neutral LP text (CPLEX-LP style), deterministic bytes."""
    lines = [f"\\ {model.name}", "MAXIMIZE"]
    obj_terms = [(j, c) for j, c in sorted(model.obj.items()) if c]
    lines.append(" obj: " + _expr(model, obj_terms) if obj_terms else " obj:")
    lines.append("SUBJECT TO")
    for i in range(model.n_rows):
        terms = list(zip(model.row_idx[i], model.row_val[i]))
        lhs = _expr(model, terms) if terms else "0"
        lines.append(f" {model.row_names[i]}: {lhs} {model.row_sense[i]} {_num(model.row_rhs[i])}")
    lines.append("BOUNDS")
    for j in range(model.n_vars):
        lines.append(f" {_num(model.lb[j])} <= {model.var_names[j]} <= {_num(model.ub[j])}")
    lines.append("BINARY")
    for j in model.binaries:
        lines.append(f" {model.var_names[j]}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def _expr(model: MilpModel, terms) -> str:
    parts = []
    for k, (j, a) in enumerate(terms):
        sign = "-" if a < 0 else "+"
        mag = _num(abs(a))
        body = model.var_names[j] if mag == "1" else f"{mag} {model.var_names[j]}"
        if k == 0:
            parts.append(f"- {body}" if a < 0 else body)
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def _parse_expr(text: str, index: dict[str, int]) -> list[tuple[int, float]]:
    toks = text.split()
    out = []
    k = 0
    sign = 1.0
    coef: Optional[float] = None
    while k < len(toks):
        tok = toks[k]
        if tok in ("+", "-"):
            sign = -1.0 if tok == "-" else 1.0
        elif tok in index:
            out.append((index[tok], sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
        else:
            try:
                coef = float(tok)
            except ValueError:
                raise ValueError(f"unknown token {tok!r} in LP expression") from None
        k += 1
    return out


def import_lp(text: str) -> MilpModel:
    """Parse text produced by :func:`export_lp` (semantic metadata is not restored)."""
    lines = [ln.rstrip() for ln in text.splitlines()]
    name = "model"
    section = None
    obj_line = ""
    rows: list[str] = []
    bounds: list[str] = []
    bins: list[str] = []
    for ln in lines:
        if not ln.strip():
            continue
        if ln.startswith("\\"):
            if section is None:
                name = ln[1:].strip() or name
            continue
        head = ln.strip()
        if head in ("MAXIMIZE", "SUBJECT TO", "BOUNDS", "BINARY", "END"):
            section = head
            continue
        if section == "MAXIMIZE":
            obj_line = head
        elif section == "SUBJECT TO":
            rows.append(head)
        elif section == "BOUNDS":
            bounds.append(head)
        elif section == "BINARY":
            bins.append(head)
    m = MilpModel(name=name)
    binset = set(bins)
    for b in bounds:
        lo, _, var, _, hi = b.split()
        j = len(m.var_names)
        m._index[var] = j
        m.var_names.append(var)
        m.var_kind.append("B" if var in binset else "C")
        m.lb.append(float(lo))
        m.ub.append(float(hi))
    body = obj_line.split(":", 1)[1] if ":" in obj_line else ""
    for j, c in _parse_expr(body, m._index):
        m.obj[j] = m.obj.get(j, 0.0) + c
    for r in rows:
        rname, rest = r.split(":", 1)
        for sense in ("<=", ">=", "="):
            if f" {sense} " in rest:
                lhs, rhs = rest.rsplit(f" {sense} ", 1)
                break
        else:
            raise ValueError(f"row without sense: {r}")
        terms = [] if lhs.strip() == "0" else _parse_expr(lhs, m._index)
        m.row_names.append(rname.strip())
        m.row_idx.append([j for j, _ in terms])
        m.row_val.append([a for _, a in terms])
        m.row_sense.append(sense)
        m.row_rhs.append(float(rhs))
    return m
