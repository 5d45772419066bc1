"""Problem and solution data model for agile-satellite task scheduling.

Times are seconds from the start of the scheduling horizon, angles are
radians and data amounts are abstract units.  Instances are immutable;
their collections are stored as tuples in canonical ``(id, index)`` order
so that equality and serialization do not depend on input order.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Optional

__all__ = [
    "EARTH_RADIUS_KM",
    "GlobalParams",
    "OrbitElements",
    "Satellite",
    "GroundStation",
    "ObsTask",
    "Otw",
    "Dtw",
    "Instance",
    "Observation",
    "Download",
    "Schedule",
    "SolveReport",
    "Defect",
    "InstanceError",
    "parse_instance",
    "write_instance",
    "check_instance",
    "parse_schedule",
    "write_schedule",
    "schedule_objective",
    "q9",
]

EARTH_RADIUS_KM = 6371.0
INSTANCE_FORMAT = "agilesched-instance/1"
SCHEDULE_FORMAT = "agilesched-schedule/1"

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]*$")
# Tolerance for pitch/roll limit checks; generated windows are clipped exactly.
_ANGLE_TOL = 1e-9


class InstanceError(ValueError):
    """Raised for malformed or invariant-violating instance/schedule files."""


def q9(x: float) -> float:
    """Round to 9 significant digits (the canonical file precision)."""
    return float(f"{x:.9g}")


@dataclass(frozen=True)
class GlobalParams:
    horizon_s: float = 86400.0


@dataclass(frozen=True)
class OrbitElements:
    semi_major_axis_km: float
    eccentricity: float
    inclination_rad: float
    arg_perigee_rad: float
    raan_rad: float
    true_anomaly_at_epoch_rad: float = 0.0
    epoch_s: float = 0.0


@dataclass(frozen=True)
class Satellite:
    id: str
    roll_limit_rad: float
    pitch_limit_rad: float
    slew_rate_rad_per_s: float
    stab_time_s: float
    sat_prep_time_s: float
    capacity_units: float = 1000.0
    initial_data_units: float = 0.0
    acq_rate_units_per_s: float = 1.0
    down_rate_units_per_s: float = 5.0
    orbit: Optional[OrbitElements] = None


@dataclass(frozen=True)
class GroundStation:
    id: str
    lat_rad: float
    lon_rad: float
    alt_km: float = 0.0
    gs_prep_time_s: float = 60.0
    min_elevation_rad: float = math.radians(5.0)


@dataclass(frozen=True)
class ObsTask:
    id: str
    priority: int
    lat_rad: float
    lon_rad: float
    process_time_s: Mapping[str, float]
    imaging: str = "mono"
    beta_rad: Optional[float] = None
    user_angle_limit_rad: Optional[float] = None

    @property
    def stereo(self) -> bool:
        return self.imaging == "stereo"

    @property
    def n_components(self) -> int:
        return 2 if self.stereo else 1


@dataclass(frozen=True)
class Otw:
    """Observation time window: admissible start times of one task on one satellite.

    Roll is constant over the window and pitch is linear in time.
    """

    task: str
    sat: str
    index: int
    t_open_s: float
    t_close_s: float
    roll_rad: float
    pitch_at_open_rad: float
    pitch_slope_rad_per_s: float

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.task, self.sat, self.index)

    @property
    def length_s(self) -> float:
        return self.t_close_s - self.t_open_s

    def pitch_at(self, t: float) -> float:
        return self.pitch_at_open_rad + self.pitch_slope_rad_per_s * (t - self.t_open_s)

    @property
    def pitch_at_close_rad(self) -> float:
        return self.pitch_at(self.t_close_s)


@dataclass(frozen=True)
class Dtw:
    """Download time window: a ground contact between a satellite and a station."""

    download: str
    sat: str
    station: str
    index: int
    t_open_s: float
    t_close_s: float

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.download, self.sat, self.index)


def _sorted(items: Iterable[Any], key) -> tuple:
    return tuple(sorted(items, key=key))


@dataclass(frozen=True)
class Instance:
    params: GlobalParams
    satellites: tuple[Satellite, ...]
    stations: tuple[GroundStation, ...]
    tasks: tuple[ObsTask, ...]
    otws: tuple[Otw, ...] = ()
    dtws: tuple[Dtw, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "satellites", _sorted(self.satellites, lambda s: s.id))
        object.__setattr__(self, "stations", _sorted(self.stations, lambda g: g.id))
        object.__setattr__(self, "tasks", _sorted(self.tasks, lambda v: v.id))
        object.__setattr__(self, "otws", _sorted(self.otws, lambda w: w.key))
        object.__setattr__(self, "dtws", _sorted(self.dtws, lambda w: w.key))

    @cached_property
    def sat_by_id(self) -> dict[str, Satellite]:
        return {s.id: s for s in self.satellites}

    @cached_property
    def station_by_id(self) -> dict[str, GroundStation]:
        return {g.id: g for g in self.stations}

    @cached_property
    def task_by_id(self) -> dict[str, ObsTask]:
        return {v.id: v for v in self.tasks}

    @cached_property
    def otw_by_key(self) -> dict[tuple[str, str, int], Otw]:
        return {w.key: w for w in self.otws}

    @cached_property
    def dtw_by_key(self) -> dict[tuple[str, str, int], Dtw]:
        return {w.key: w for w in self.dtws}

    @cached_property
    def otw_index_sets(self) -> dict[tuple[str, str], tuple[int, ...]]:
        """K_vs: window indices grouped by (task, satellite)."""
        out: dict[tuple[str, str], list[int]] = {}
        for w in self.otws:
            out.setdefault((w.task, w.sat), []).append(w.index)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def dtw_index_sets(self) -> dict[tuple[str, str], tuple[int, ...]]:
        """L_ds: contact indices grouped by (download, satellite)."""
        out: dict[tuple[str, str], list[int]] = {}
        for w in self.dtws:
            out.setdefault((w.download, w.sat), []).append(w.index)
        return {k: tuple(v) for k, v in out.items()}

    def angle_limits(self, sat_id: str, task_id: str) -> tuple[float, float]:
        """Effective (roll, pitch) limits: satellite limits capped by the user limit."""
        sat = self.sat_by_id[sat_id]
        alpha = self.task_by_id[task_id].user_angle_limit_rad
        if alpha is None:
            return sat.roll_limit_rad, sat.pitch_limit_rad
        return min(sat.roll_limit_rad, alpha), min(sat.pitch_limit_rad, alpha)

    def process_time(self, task_id: str, sat_id: str) -> float:
        return self.task_by_id[task_id].process_time_s[sat_id]

    def with_otws(self, otws: Iterable[Otw]) -> "Instance":
        return Instance(self.params, self.satellites, self.stations, self.tasks, tuple(otws), self.dtws)


# --------------------------------------------------------------------------
# Schedules and reports


@dataclass(frozen=True)
class Observation:
    task: str
    component: int
    sat: str
    window: int
    t_start_s: float
    pitch_rad: float

    @property
    def otw_key(self) -> tuple[str, str, int]:
        return (self.task, self.sat, self.window)


@dataclass(frozen=True)
class Download:
    download: str
    sat: str
    window: int
    t_start_s: float
    t_end_s: float

    @property
    def dtw_key(self) -> tuple[str, str, int]:
        return (self.download, self.sat, self.window)

    @property
    def duration_s(self) -> float:
        return self.t_end_s - self.t_start_s


@dataclass(frozen=True)
class Schedule:
    observations: tuple[Observation, ...] = ()
    downloads: tuple[Download, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "observations",
            _sorted(self.observations, lambda o: (o.task, o.component, o.sat, o.window, o.t_start_s)),
        )
        object.__setattr__(
            self, "downloads", _sorted(self.downloads, lambda d: (d.download, d.sat, d.window, d.t_start_s))
        )


def schedule_objective(inst: Instance, sch: Schedule) -> int:
    """J: summed priority of tasks whose primary component is scheduled."""
    done = {o.task for o in sch.observations if o.component == 1}
    return sum(inst.task_by_id[v].priority for v in done if v in inst.task_by_id)


def assigned_task_count(sch: Schedule) -> int:
    return len({o.task for o in sch.observations if o.component == 1})


@dataclass
class SolveReport:
    schedule: Schedule
    objective: float
    dual_bound: float
    status: str  # "Optimal" | "TimeLimit" | "Infeasible" | "Feasible"
    nodes_explored: int = 0
    wall_time_s: float = 0.0
    algorithm: str = "exact"
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return max(0.0, (self.dual_bound - self.objective) / max(self.objective, 1.0))

    def render_objective(self) -> str:
        """Objective as printed in result tables: ``J`` or ``J (g%)`` when a gap remains."""
        j = f"{self.objective:.0f}"
        if self.gap > 0:
            return f"{j} ({_pct(self.gap * 100.0)}%)"
        return j


def _pct(p: float) -> str:
    s = f"{p:.2f}".rstrip("0").rstrip(".")
    return s if s else "0"


# --------------------------------------------------------------------------
# Structural checks


@dataclass(frozen=True)
class Defect:
    entity: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.rule}"


def check_instance(inst: Instance) -> list[Defect]:
    """Return every violated type invariant; an empty list means well-formed."""
    out: list[Defect] = []

    def bad(entity: str, rule: str) -> None:
        out.append(Defect(entity, rule))

    if not (inst.params.horizon_s > 0):
        bad("params", "horizon must be positive")
    horizon = inst.params.horizon_s

    for coll, name in ((inst.satellites, "satellite"), (inst.stations, "station"), (inst.tasks, "task")):
        seen: set[str] = set()
        for item in coll:
            if not _ID_RE.match(item.id):
                bad(f"{name} {item.id!r}", "invalid id")
            if item.id in seen:
                bad(f"{name} {item.id}", "duplicate id")
            seen.add(item.id)

    for s in inst.satellites:
        ent = f"satellite {s.id}"
        for fname in ("roll_limit_rad", "pitch_limit_rad", "slew_rate_rad_per_s", "acq_rate_units_per_s",
                      "down_rate_units_per_s", "capacity_units"):
            if not (getattr(s, fname) > 0):
                bad(ent, f"{fname} must be positive")
        for fname in ("stab_time_s", "sat_prep_time_s"):
            if not (getattr(s, fname) >= 0):
                bad(ent, f"{fname} must be non-negative")
        if not (s.initial_data_units >= 0):
            bad(ent, "initial data negative")
        if s.initial_data_units > s.capacity_units:
            bad(ent, "initial data exceeds capacity")
        if s.orbit is not None:
            if not (s.orbit.semi_major_axis_km > EARTH_RADIUS_KM):
                bad(ent, "orbit below Earth surface")
            if not (0 <= s.orbit.eccentricity < 1):
                bad(ent, "eccentricity out of range")

    for g in inst.stations:
        if not (g.gs_prep_time_s >= 0):
            bad(f"station {g.id}", "gs_prep_time_s must be non-negative")

    for v in inst.tasks:
        ent = f"task {v.id}"
        if not (isinstance(v.priority, int) and v.priority >= 1):
            bad(ent, "priority must be an integer >= 1")
        if v.imaging not in ("mono", "stereo"):
            bad(ent, "imaging must be mono or stereo")
        if v.stereo and not (v.beta_rad is not None and v.beta_rad > 0):
            bad(ent, "stereo task needs beta > 0")
        if v.user_angle_limit_rad is not None and not (v.user_angle_limit_rad > 0):
            bad(ent, "user angle limit must be positive")
        for sid, tp in v.process_time_s.items():
            if sid not in inst.sat_by_id:
                bad(ent, f"process time for unknown satellite {sid}")
            if not (tp > 0):
                bad(ent, "process time must be positive")

    for w in inst.otws:
        ent = f"otw {w.task}/{w.sat}/{w.index}"
        if w.task not in inst.task_by_id:
            bad(ent, "unknown task")
            continue
        if w.sat not in inst.sat_by_id:
            bad(ent, "unknown satellite")
            continue
        if w.sat not in inst.task_by_id[w.task].process_time_s:
            bad(ent, "no process time for this satellite")
        _check_interval(w.t_open_s, w.t_close_s, horizon, ent, bad)
        roll_lim, pitch_lim = inst.angle_limits(w.sat, w.task)
        if abs(w.roll_rad) > roll_lim + _ANGLE_TOL:
            bad(ent, "roll exceeds limit")
        if max(abs(w.pitch_at_open_rad), abs(w.pitch_at_close_rad)) > pitch_lim + _ANGLE_TOL:
            bad(ent, "pitch exceeds limit")

    for w in inst.dtws:
        ent = f"dtw {w.download}/{w.sat}/{w.index}"
        if w.sat not in inst.sat_by_id:
            bad(ent, "unknown satellite")
        if w.station not in inst.station_by_id:
            bad(ent, "unknown station")
        _check_interval(w.t_open_s, w.t_close_s, horizon, ent, bad)

    for label, sets in (("otw", inst.otw_index_sets), ("dtw", inst.dtw_index_sets)):
        for key, idx in sets.items():
            if list(idx) != list(range(len(idx))):
                bad(f"{label} {key[0]}/{key[1]}", "window indices not contiguous from 0")
    return out


def _check_interval(a: float, b: float, horizon: float, ent: str, bad) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        bad(ent, "window bounds not finite")
    elif a > b:
        bad(ent, "window inverted")
    elif a == b:
        bad(ent, "window empty")
    if a < 0:
        bad(ent, "window opens before horizon start")
    if b > horizon:
        bad(ent, "window closes after horizon")


# --------------------------------------------------------------------------
# Instance file I/O


def _f(x: float) -> float:
    return q9(float(x))


def _instance_to_obj(inst: Instance) -> dict[str, Any]:
    sats = []
    for s in inst.satellites:
        d: dict[str, Any] = {
            "id": s.id,
            "roll_limit_rad": _f(s.roll_limit_rad),
            "pitch_limit_rad": _f(s.pitch_limit_rad),
            "slew_rate_rad_per_s": _f(s.slew_rate_rad_per_s),
            "stab_time_s": _f(s.stab_time_s),
            "sat_prep_time_s": _f(s.sat_prep_time_s),
            "capacity_units": _f(s.capacity_units),
            "initial_data_units": _f(s.initial_data_units),
            "acq_rate_units_per_s": _f(s.acq_rate_units_per_s),
            "down_rate_units_per_s": _f(s.down_rate_units_per_s),
        }
        if s.orbit is not None:
            o = s.orbit
            d["orbit"] = {
                "semi_major_axis_km": _f(o.semi_major_axis_km),
                "eccentricity": _f(o.eccentricity),
                "inclination_rad": _f(o.inclination_rad),
                "arg_perigee_rad": _f(o.arg_perigee_rad),
                "raan_rad": _f(o.raan_rad),
                "true_anomaly_at_epoch_rad": _f(o.true_anomaly_at_epoch_rad),
                "epoch_s": _f(o.epoch_s),
            }
        sats.append(d)
    stations = [
        {
            "id": g.id,
            "lat_rad": _f(g.lat_rad),
            "lon_rad": _f(g.lon_rad),
            "alt_km": _f(g.alt_km),
            "gs_prep_time_s": _f(g.gs_prep_time_s),
            "min_elevation_rad": _f(g.min_elevation_rad),
        }
        for g in inst.stations
    ]
    tasks = []
    for v in inst.tasks:
        d = {"id": v.id, "priority": int(v.priority), "imaging": v.imaging}
        if v.stereo:
            d["beta"] = _f(v.beta_rad)  # type: ignore[arg-type]
        d["lat_rad"] = _f(v.lat_rad)
        d["lon_rad"] = _f(v.lon_rad)
        d["process_time_s"] = {k: _f(v.process_time_s[k]) for k in sorted(v.process_time_s)}
        if v.user_angle_limit_rad is not None:
            d["user_angle_limit_rad"] = _f(v.user_angle_limit_rad)
        tasks.append(d)
    otws = [
        {
            "task": w.task,
            "sat": w.sat,
            "index": int(w.index),
            "t_open_s": _f(w.t_open_s),
            "t_close_s": _f(w.t_close_s),
            "roll_rad": _f(w.roll_rad),
            "pitch_at_open_rad": _f(w.pitch_at_open_rad),
            "pitch_slope_rad_per_s": _f(w.pitch_slope_rad_per_s),
        }
        for w in inst.otws
    ]
    dtws = [
        {
            "download": w.download,
            "sat": w.sat,
            "station": w.station,
            "index": int(w.index),
            "t_open_s": _f(w.t_open_s),
            "t_close_s": _f(w.t_close_s),
        }
        for w in inst.dtws
    ]
    return {
        "format": INSTANCE_FORMAT,
        "params": {"horizon_s": _f(inst.params.horizon_s)},
        "satellites": sats,
        "stations": stations,
        "tasks": tasks,
        "otws": otws,
        "dtws": dtws,
    }


def write_instance(inst: Instance) -> str:
    """Canonical text form: fixed key order, sorted arrays, 9 significant digits."""
    return json.dumps(_instance_to_obj(inst), indent=1) + "\n"


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _get(d: Mapping[str, Any], key: str, where: str, default: Any = ...) -> Any:
    if key in d:
        return d[key]
    if default is ...:
        raise InstanceError(f"{where}: missing field {key!r}")
    return default


def _num(d: Mapping[str, Any], key: str, where: str, default: Any = ...) -> float:
    val = _get(d, key, where, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InstanceError(f"{where}: field {key!r} must be a number")
    return _f(val)


def _int(d: Mapping[str, Any], key: str, where: str) -> int:
    val = _get(d, key, where)
    if isinstance(val, bool) or not isinstance(val, int):
        raise InstanceError(f"{where}: field {key!r} must be an integer")
    return val


def _str(d: Mapping[str, Any], key: str, where: str) -> str:
    val = _get(d, key, where)
    if not isinstance(val, str):
        raise InstanceError(f"{where}: field {key!r} must be a string")
    return val


def parse_instance(text: str, *, check: bool = True) -> Instance:
    """Parse instance text; raises :class:`InstanceError` on any defect."""
    obj = _loads(text)
    if not isinstance(obj, dict):
        raise InstanceError("top level must be an object")
    params_obj = _get(obj, "params", "instance", {})
    if "horizon_hr" in params_obj and "horizon_s" not in params_obj:
        horizon = _num(params_obj, "horizon_hr", "params") * 3600.0
    else:
        horizon = _num(params_obj, "horizon_s", "params", 86400.0)
    params = GlobalParams(horizon_s=_f(horizon))

    sats = []
    for i, d in enumerate(_get(obj, "satellites", "instance")):
        where = f"satellites[{i}]"
        orbit = None
        if d.get("orbit") is not None:
            o = d["orbit"]
            ow = where + ".orbit"
            orbit = OrbitElements(
                semi_major_axis_km=_num(o, "semi_major_axis_km", ow),
                eccentricity=_num(o, "eccentricity", ow),
                inclination_rad=_num(o, "inclination_rad", ow),
                arg_perigee_rad=_num(o, "arg_perigee_rad", ow),
                raan_rad=_num(o, "raan_rad", ow),
                true_anomaly_at_epoch_rad=_num(o, "true_anomaly_at_epoch_rad", ow, 0.0),
                epoch_s=_num(o, "epoch_s", ow, 0.0),
            )
        sats.append(
            Satellite(
                id=_str(d, "id", where),
                roll_limit_rad=_num(d, "roll_limit_rad", where),
                pitch_limit_rad=_num(d, "pitch_limit_rad", where),
                slew_rate_rad_per_s=_num(d, "slew_rate_rad_per_s", where),
                stab_time_s=_num(d, "stab_time_s", where, 5.0),
                sat_prep_time_s=_num(d, "sat_prep_time_s", where, 20.0),
                capacity_units=_num(d, "capacity_units", where, 1000.0),
                initial_data_units=_num(d, "initial_data_units", where, 0.0),
                acq_rate_units_per_s=_num(d, "acq_rate_units_per_s", where, 1.0),
                down_rate_units_per_s=_num(d, "down_rate_units_per_s", where, 5.0),
                orbit=orbit,
            )
        )

    stations = []
    for i, d in enumerate(_get(obj, "stations", "instance", [])):
        where = f"stations[{i}]"
        stations.append(
            GroundStation(
                id=_str(d, "id", where),
                lat_rad=_num(d, "lat_rad", where),
                lon_rad=_num(d, "lon_rad", where),
                alt_km=_num(d, "alt_km", where, 0.0),
                gs_prep_time_s=_num(d, "gs_prep_time_s", where, 60.0),
                min_elevation_rad=_num(d, "min_elevation_rad", where, q9(math.radians(5.0))),
            )
        )

    tasks = []
    for i, d in enumerate(_get(obj, "tasks", "instance")):
        where = f"tasks[{i}]"
        imaging = d.get("imaging", "mono")
        beta = _num(d, "beta", where) if imaging == "stereo" else None
        pt_obj = _get(d, "process_time_s", where)
        if not isinstance(pt_obj, dict):
            raise InstanceError(f"{where}: process_time_s must map satellite id to seconds")
        alpha = d.get("user_angle_limit_rad")
        tasks.append(
            ObsTask(
                id=_str(d, "id", where),
                priority=_int(d, "priority", where),
                lat_rad=_num(d, "lat_rad", where, 0.0),
                lon_rad=_num(d, "lon_rad", where, 0.0),
                process_time_s={k: _num(pt_obj, k, where + ".process_time_s") for k in sorted(pt_obj)},
                imaging=imaging,
                beta_rad=beta,
                user_angle_limit_rad=None if alpha is None else _num(d, "user_angle_limit_rad", where),
            )
        )

    otws = []
    for i, d in enumerate(_get(obj, "otws", "instance", [])):
        where = f"otws[{i}]"
        otws.append(
            Otw(
                task=_str(d, "task", where),
                sat=_str(d, "sat", where),
                index=_int(d, "index", where),
                t_open_s=_num(d, "t_open_s", where),
                t_close_s=_num(d, "t_close_s", where),
                roll_rad=_num(d, "roll_rad", where, 0.0),
                pitch_at_open_rad=_num(d, "pitch_at_open_rad", where, 0.0),
                pitch_slope_rad_per_s=_num(d, "pitch_slope_rad_per_s", where, 0.0),
            )
        )
    dtws = []
    for i, d in enumerate(_get(obj, "dtws", "instance", [])):
        where = f"dtws[{i}]"
        dtws.append(
            Dtw(
                download=_str(d, "download", where),
                sat=_str(d, "sat", where),
                station=_str(d, "station", where),
                index=_int(d, "index", where),
                t_open_s=_num(d, "t_open_s", where),
                t_close_s=_num(d, "t_close_s", where),
            )
        )

    inst = Instance(params, tuple(sats), tuple(stations), tuple(tasks), tuple(otws), tuple(dtws))
    if check:
        defects = check_instance(inst)
        if defects:
            raise InstanceError("; ".join(str(d) for d in defects))
    return inst


# --------------------------------------------------------------------------
# Schedule file I/O
#
# Schedule times keep full double precision: rounding a start time to 9
# significant digits can move it by ~1e-5 s, far beyond the validator's
# default 1e-6 s tolerance.


def write_schedule(sch: Schedule) -> str:
    obj = {
        "format": SCHEDULE_FORMAT,
        "observations": [
            {
                "task": o.task,
                "component": o.component,
                "sat": o.sat,
                "window": o.window,
                "t_start_s": float(o.t_start_s),
                "pitch_rad": float(o.pitch_rad),
            }
            for o in sch.observations
        ],
        "downloads": [
            {
                "download": d.download,
                "sat": d.sat,
                "window": d.window,
                "t_start_s": float(d.t_start_s),
                "t_end_s": float(d.t_end_s),
            }
            for d in sch.downloads
        ],
    }
    return json.dumps(obj, indent=1) + "\n"


def parse_schedule(text: str) -> Schedule:
    obj = _loads(text)
    if not isinstance(obj, dict):
        raise InstanceError("top level must be an object")
    obs = []
    for i, d in enumerate(_get(obj, "observations", "schedule", [])):
        where = f"observations[{i}]"
        obs.append(
            Observation(
                task=_str(d, "task", where),
                component=_int(d, "component", where),
                sat=_str(d, "sat", where),
                window=_int(d, "window", where),
                t_start_s=float(_get(d, "t_start_s", where)),
                pitch_rad=float(_get(d, "pitch_rad", where)),
            )
        )
    dls = []
    for i, d in enumerate(_get(obj, "downloads", "schedule", [])):
        where = f"downloads[{i}]"
        dls.append(
            Download(
                download=_str(d, "download", where),
                sat=_str(d, "sat", where),
                window=_int(d, "window", where),
                t_start_s=float(_get(d, "t_start_s", where)),
                t_end_s=float(_get(d, "t_end_s", where)),
            )
        )
    return Schedule(tuple(obs), tuple(dls))
