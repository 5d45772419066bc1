"""Independent schedule checker.

Every constraint family is re-derived here from the instance data alone;
nothing is shared with the model builder.  The onboard-data check follows
the exact piecewise-linear buffer level rather than event snapshots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .domain import Download, Instance, Observation, Schedule, schedule_objective

FAMILIES = (
    "Assignment",
    "ObsWindow",
    "DlWindow",
    "ObsOverlap",
    "GsOverlap",
    "SatDlOverlap",
    "Capacity",
    "BufferNonneg",
    "Stereo",
    "PitchLink",
)

PITCH_LINK_TOL = 1e-9


class StructuralError(ValueError):
    """A schedule entry references an entity the instance does not contain."""


@dataclass(frozen=True)
class Finding:
    """One violated check.

    ``sense`` is ``">="`` when ``value`` must be at least ``bound`` and
    ``"<="`` when at most; ``margin`` is the signed slack (negative = violated).
    """

    family: str
    entities: tuple[str, ...]
    value: float
    bound: float
    margin: float
    sense: str = ">="

    def __str__(self) -> str:
        return (
            f"{self.family:<12} {' '.join(self.entities)}: value={self.value:.9g} "
            f"{self.sense} bound={self.bound:.9g} (margin {self.margin:.3g})"
        )


@dataclass
class Verdict:
    passed: bool
    findings: list[Finding] = field(default_factory=list)
    objective: int = 0

    @property
    def families(self) -> set[str]:
        return {f.family for f in self.findings}

    def render(self) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'}  J={self.objective}  findings={len(self.findings)}"
        return "\n".join([head] + [f"  {f}" for f in self.findings]) + "\n"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "objective": self.objective,
            "findings": [
                {
                    "family": f.family,
                    "entities": list(f.entities),
                    "value": f.value,
                    "bound": f.bound,
                    "margin": f.margin,
                    "sense": f.sense,
                }
                for f in self.findings
            ],
        }


@dataclass(frozen=True)
class BufferTrajectory:
    """Onboard data level of one satellite: (t, units) breakpoints sorted by time.

    An observation adds its data as a jump at its end time; during a download
    session the level falls linearly.  Jumps appear as two points at equal t.
    """

    sat: str
    points: tuple[tuple[float, float], ...]

    @property
    def final_units(self) -> float:
        return self.points[-1][1]

    def level_at(self, t: float) -> float:
        """Level just after all events at or before ``t``."""
        pts = self.points
        val = pts[0][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t1 <= t:
                val = v1
                continue
            if t0 <= t < t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            break
        return val


def _obs_label(o: Observation) -> str:
    return f"{o.task}#{o.component}@{o.sat}/{o.window}"


def _dl_label(d: Download) -> str:
    return f"{d.download}@{d.sat}/{d.window}"


def _resolve(inst: Instance, sch: Schedule) -> None:
    for o in sch.observations:
        if o.otw_key not in inst.otw_by_key:
            raise StructuralError(f"observation {_obs_label(o)} references unknown window")
    for d in sch.downloads:
        if d.dtw_key not in inst.dtw_by_key:
            raise StructuralError(f"download {_dl_label(d)} references unknown window")


def buffer_trajectory(inst: Instance, sch: Schedule, sat: str) -> BufferTrajectory:
    s = inst.sat_by_id[sat]
    # events: (time, order, kind, payload); at equal times jumps precede slope changes
    jumps: list[tuple[float, float]] = []
    for o in sch.observations:
        if o.sat == sat:
            tp = inst.process_time(o.task, sat)
            jumps.append((o.t_start_s + tp, s.acq_rate_units_per_s * tp))
    sessions = [(d.t_start_s, d.t_end_s) for d in sch.downloads if d.sat == sat and d.t_end_s > d.t_start_s]
    times = sorted({t for t, _ in jumps} | {a for a, _ in sessions} | {b for _, b in sessions})
    jump_at: dict[float, float] = {}
    for t, amt in jumps:
        jump_at[t] = jump_at.get(t, 0.0) + amt
    gamma = s.down_rate_units_per_s
    level = s.initial_data_units
    pts: list[tuple[float, float]] = [(0.0, level)]
    t_prev = 0.0
    for t in times:
        rate = sum(1 for a, b in sessions if a <= t_prev and b >= t and b > a)
        level -= gamma * rate * (t - t_prev)
        pts.append((t, level))
        if t in jump_at:
            level += jump_at[t]
            pts.append((t, level))
        t_prev = t
    if pts[-1][0] < inst.params.horizon_s:
        pts.append((inst.params.horizon_s, level))
    return BufferTrajectory(sat, tuple(pts))


def _transition(inst: Instance, a: Observation, b: Observation) -> float:
    """Required start-to-start gap when ``a`` precedes ``b`` on one satellite."""
    wa, wb = inst.otw_by_key[a.otw_key], inst.otw_by_key[b.otw_key]
    s = inst.sat_by_id[a.sat]
    dphi = abs(wa.roll_rad - wb.roll_rad)
    dth = abs(wa.pitch_at(a.t_start_s) - wb.pitch_at(b.t_start_s))
    return inst.process_time(a.task, a.sat) + s.stab_time_s + (dphi + dth) / s.slew_rate_rad_per_s


def validate_schedule(inst: Instance, sch: Schedule, tol_s: float = 1e-6) -> Verdict:
    """Check ``sch`` against every constraint family; raises :class:`StructuralError` on bad references."""
    _resolve(inst, sch)
    tol = tol_s
    out: list[Finding] = []

    def ge(family: str, ents: tuple[str, ...], value: float, bound: float) -> None:
        m = value - bound
        if m < -tol:
            out.append(Finding(family, ents, value, bound, m, ">="))

    def le(family: str, ents: tuple[str, ...], value: float, bound: float) -> None:
        m = bound - value
        if m < -tol:
            out.append(Finding(family, ents, value, bound, m, "<="))

    # task assignment
    by_task: dict[str, list[Observation]] = {}
    for o in sch.observations:
        by_task.setdefault(o.task, []).append(o)
    for v, obs in sorted(by_task.items()):
        task = inst.task_by_id[v]
        comps = [o.component for o in obs]
        allowed = (1, 2) if task.stereo else (1,)
        for c in sorted(set(comps)):
            le("Assignment", (v, f"component {c}"), float(comps.count(c)), 1.0)
            if c not in allowed:
                le("Assignment", (v, f"component {c}"), float(c), float(max(allowed)))
        if task.stereo and len(set(comps) & {1, 2}) == 1:
            ge("Assignment", (v, "stereo pair incomplete"), 1.0, 2.0)

    # windows and pitch model
    for o in sch.observations:
        w = inst.otw_by_key[o.otw_key]
        ge("ObsWindow", (_obs_label(o), "open"), o.t_start_s, w.t_open_s)
        le("ObsWindow", (_obs_label(o), "close"), o.t_start_s, w.t_close_s)
        err = abs(o.pitch_rad - w.pitch_at(o.t_start_s))
        if err > PITCH_LINK_TOL:
            out.append(Finding("PitchLink", (_obs_label(o),), err, PITCH_LINK_TOL, PITCH_LINK_TOL - err, "<="))
    for d in sch.downloads:
        w = inst.dtw_by_key[d.dtw_key]
        ge("DlWindow", (_dl_label(d), "start"), d.t_start_s, w.t_open_s)
        le("DlWindow", (_dl_label(d), "end"), d.t_end_s, w.t_close_s)
        ge("DlWindow", (_dl_label(d), "order"), d.t_end_s, d.t_start_s)

    # observation separation on each satellite
    for a, b in itertools.combinations(sch.observations, 2):
        if a.sat != b.sat:
            continue
        gap_ab = (b.t_start_s - a.t_start_s) - _transition(inst, a, b)
        gap_ba = (a.t_start_s - b.t_start_s) - _transition(inst, b, a)
        first, second = (a, b) if gap_ab >= gap_ba else (b, a)
        req = _transition(inst, first, second)
        ge("ObsOverlap", (_obs_label(first), _obs_label(second)), second.t_start_s - first.t_start_s, req)

    # download separation: per station and per satellite
    for a, b in itertools.combinations(sch.downloads, 2):
        first, second = (a, b) if (a.t_start_s, a.t_end_s) <= (b.t_start_s, b.t_end_s) else (b, a)
        ga = inst.dtw_by_key[first.dtw_key].station
        gb = inst.dtw_by_key[second.dtw_key].station
        gap = second.t_start_s - first.t_end_s
        ents = (_dl_label(first), _dl_label(second))
        if ga == gb:
            ge("GsOverlap", ents, gap, inst.station_by_id[ga].gs_prep_time_s)
        if first.sat == second.sat:
            ge("SatDlOverlap", ents, gap, inst.sat_by_id[first.sat].sat_prep_time_s)

    # onboard data level
    for s in inst.satellites:
        if not any(o.sat == s.id for o in sch.observations) and not any(d.sat == s.id for d in sch.downloads):
            if s.initial_data_units <= s.capacity_units:
                continue
        traj = buffer_trajectory(inst, sch, s.id)
        worst_hi = max(traj.points, key=lambda p: p[1])
        worst_lo = min(traj.points, key=lambda p: p[1])
        le("Capacity", (s.id, f"t={worst_hi[0]:.6f}"), worst_hi[1], s.capacity_units)
        ge("BufferNonneg", (s.id, f"t={worst_lo[0]:.6f}"), worst_lo[1], 0.0)

    # stereo pitch separation
    for v, obs in sorted(by_task.items()):
        task = inst.task_by_id[v]
        if not task.stereo:
            continue
        c1 = [o for o in obs if o.component == 1]
        c2 = [o for o in obs if o.component == 2]
        for a in c1:
            for b in c2:
                th_a = inst.otw_by_key[a.otw_key].pitch_at(a.t_start_s)
                th_b = inst.otw_by_key[b.otw_key].pitch_at(b.t_start_s)
                ge("Stereo", (v,), abs(th_a - th_b), task.beta_rad)  # type: ignore[arg-type]

    return Verdict(passed=not out, findings=out, objective=schedule_objective(inst, sch))


def render_verdict(v: Verdict) -> str:
    return v.render()


def family_of(findings: list[Finding]) -> Optional[str]:
    fams = {f.family for f in findings}
    return fams.pop() if len(fams) == 1 else None
