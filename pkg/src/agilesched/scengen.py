"""Two-body orbits, target-pointing geometry and time-window extraction.

Earth is a sphere rotating at a constant rate with the Greenwich meridian
aligned with the inertial x axis at t = 0.  Windows are detected on a 1-s
grid and their edges refined by bisection to 0.01 s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domain import (
    EARTH_RADIUS_KM,
    Dtw,
    GlobalParams,
    GroundStation,
    Instance,
    ObsTask,
    OrbitElements,
    Otw,
    Satellite,
    q9,
)

MU_KM3_S2 = 398600.4418
EARTH_ROT_RAD_S = 7.2921159e-5

SAMPLE_STEP_S = 1.0
EDGE_TOL_S = 0.01
# Inward margin when clipping the linear pitch model to the limit, so the
# 9-digit quantized window still satisfies it.
_CLIP_MARGIN_RAD = 2e-6

DEG = math.pi / 180.0


@dataclass(frozen=True)
class EciState:
    position_km: np.ndarray
    velocity_km_s: np.ndarray
    t_s: float


@dataclass(frozen=True)
class PointingSample:
    t_s: float
    roll_rad: float
    pitch_rad: float
    visible: bool = True


# --------------------------------------------------------------------------
# Orbits


def orbital_period(el: OrbitElements) -> float:
    return 2.0 * math.pi * math.sqrt(el.semi_major_axis_km**3 / MU_KM3_S2)


def _perifocal_to_eci(el: OrbitElements) -> np.ndarray:
    cO, sO = math.cos(el.raan_rad), math.sin(el.raan_rad)
    cw, sw = math.cos(el.arg_perigee_rad), math.sin(el.arg_perigee_rad)
    ci, si = math.cos(el.inclination_rad), math.sin(el.inclination_rad)
    return np.array(
        [
            [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
            [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
            [sw * si, cw * si, ci],
        ]
    )


def propagate(el: OrbitElements, t_s: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized two-body propagation; returns (positions, velocities) of shape (N, 3)."""
    t = np.atleast_1d(np.asarray(t_s, dtype=float))
    a, e = el.semi_major_axis_km, el.eccentricity
    n = math.sqrt(MU_KM3_S2 / a**3)
    nu0 = el.true_anomaly_at_epoch_rad
    E0 = 2.0 * math.atan2(math.sqrt(1 - e) * math.sin(nu0 / 2), math.sqrt(1 + e) * math.cos(nu0 / 2))
    M = (E0 - e * math.sin(E0)) + n * (t - el.epoch_s)
    E = M.copy() if e < 0.8 else np.full_like(M, math.pi)
    for _ in range(50):
        dE = (E - e * np.sin(E) - M) / (1.0 - e * np.cos(E))
        E -= dE
        if np.max(np.abs(dE)) < 1e-14:
            break
    nu = 2.0 * np.arctan2(math.sqrt(1 + e) * np.sin(E / 2), math.sqrt(1 - e) * np.cos(E / 2))
    r = a * (1.0 - e * np.cos(E))
    p = a * (1.0 - e * e)
    cnu, snu = np.cos(nu), np.sin(nu)
    r_pf = np.stack([r * cnu, r * snu, np.zeros_like(r)], axis=1)
    vf = math.sqrt(MU_KM3_S2 / p)
    v_pf = np.stack([-vf * snu, vf * (e + cnu), np.zeros_like(r)], axis=1)
    Q = _perifocal_to_eci(el)
    return r_pf @ Q.T, v_pf @ Q.T


def kepler_propagate(el: OrbitElements, t_s: float) -> EciState:
    """Keplerian state at time ``t_s``."""
    r, v = propagate(el, t_s)
    return EciState(r[0], v[0], float(t_s))


# --------------------------------------------------------------------------
# Earth-fixed points


def geodetic_to_ecef(lat_rad: float, lon_rad: float, alt_km: float = 0.0) -> np.ndarray:
    R = EARTH_RADIUS_KM + alt_km
    cl = math.cos(lat_rad)
    return np.array([R * cl * math.cos(lon_rad), R * cl * math.sin(lon_rad), R * math.sin(lat_rad)])


def ecef_to_eci(p: np.ndarray, t_s: np.ndarray | float) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t_s, dtype=float))
    g = EARTH_ROT_RAD_S * t
    c, s = np.cos(g), np.sin(g)
    return np.stack([p[0] * c - p[1] * s, p[0] * s + p[1] * c, np.full_like(t, p[2])], axis=1)


def _angles(r: np.ndarray, v: np.ndarray, tgt: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Roll, pitch and visibility for rows of satellite states and target positions.

    Frame: z toward nadir, h along the orbit normal, x = z cross h (forward).
    Roll is the angle in the h-z plane, pitch the elevation of the line of
    sight out of that plane toward x.
    """
    rn = np.linalg.norm(r, axis=1, keepdims=True)
    z = -r / rn
    h = np.cross(r, v)
    h /= np.linalg.norm(h, axis=1, keepdims=True)
    x = np.cross(z, h)
    rho = tgt - r
    rho_n = np.linalg.norm(rho, axis=1)
    px = np.einsum("ij,ij->i", rho, x)
    ph = np.einsum("ij,ij->i", rho, h)
    pz = np.einsum("ij,ij->i", rho, z)
    roll = np.arctan2(ph, pz)
    pitch = np.arcsin(np.clip(px / rho_n, -1.0, 1.0))
    up = tgt / np.linalg.norm(tgt, axis=1, keepdims=True)
    visible = np.einsum("ij,ij->i", -rho, up) > 0.0
    return roll, pitch, visible


def pointing_angles(sat_state: EciState, target: tuple[float, float], t_s: float) -> PointingSample:
    """Roll/pitch that point the boresight at a geodetic target (lat, lon in rad)."""
    tgt = ecef_to_eci(geodetic_to_ecef(target[0], target[1]), t_s)
    roll, pitch, vis = _angles(sat_state.position_km[None, :], sat_state.velocity_km_s[None, :], tgt)
    return PointingSample(float(t_s), float(roll[0]), float(pitch[0]), bool(vis[0]))


def elevation(sat_pos_eci: np.ndarray, station: GroundStation, t_s: np.ndarray | float) -> np.ndarray:
    st = ecef_to_eci(geodetic_to_ecef(station.lat_rad, station.lon_rad, station.alt_km), t_s)
    rho = np.atleast_2d(sat_pos_eci) - st
    up = st / np.linalg.norm(st, axis=1, keepdims=True)
    return np.arcsin(np.clip(np.einsum("ij,ij->i", rho, up) / np.linalg.norm(rho, axis=1), -1, 1))


# --------------------------------------------------------------------------
# Window detection


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of True runs."""
    if not mask.any():
        return []
    d = np.diff(mask.astype(np.int8))
    starts = list(np.nonzero(d == 1)[0] + 1)
    ends = list(np.nonzero(d == -1)[0])
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(len(mask) - 1)
    return list(zip(starts, ends))


def _bisect(pred, t_in: float, t_out: float, tol: float = EDGE_TOL_S / 4) -> float:
    """Boundary between a point where pred holds and one where it does not."""
    while abs(t_out - t_in) > tol:
        mid = 0.5 * (t_in + t_out)
        if pred(mid):
            t_in = mid
        else:
            t_out = mid
    return t_in


def _intervals(pred_vec, pred_scalar, times: np.ndarray, idx: np.ndarray, horizon: float) -> list[tuple[float, float]]:
    """Maximal intervals where the predicate holds, found on the sample grid and refined."""
    if len(idx) == 0:
        return []
    mask_sub = pred_vec(times[idx])
    full = np.zeros(len(times), dtype=bool)
    full[idx] = mask_sub
    out = []
    for i0, i1 in _runs(full):
        a = 0.0 if i0 == 0 else _bisect(pred_scalar, times[i0], times[i0 - 1])
        b = horizon if i1 == len(times) - 1 else _bisect(pred_scalar, times[i1], times[i1 + 1])
        b = min(b, horizon)
        if b > a:
            out.append((a, b))
    return out


def _grid(horizon: float) -> np.ndarray:
    n = int(math.floor(horizon / SAMPLE_STEP_S))
    t = np.arange(n + 1, dtype=float) * SAMPLE_STEP_S
    if t[-1] < horizon:
        t = np.append(t, horizon)
    return t


def _candidate_idx(r_unit: np.ndarray, p_ecef: np.ndarray, times: np.ndarray, max_central_rad: float) -> np.ndarray:
    u = p_ecef / np.linalg.norm(p_ecef)
    tgt = ecef_to_eci(u, times)
    cosang = np.einsum("ij,ij->i", r_unit, tgt)
    near = cosang > math.cos(max_central_rad)
    # widen by one sample so refinement brackets are available
    near = near | np.roll(near, 1) | np.roll(near, -1)
    return np.nonzero(near)[0]


class _SatTrack:
    """Cached 1-s propagation of one satellite over the horizon."""

    def __init__(self, sat: Satellite, horizon: float):
        if sat.orbit is None:
            raise ValueError(f"satellite {sat.id} has no orbit elements")
        self.sat = sat
        self.horizon = horizon
        self.times = _grid(horizon)
        self.r, self.v = propagate(sat.orbit, self.times)
        self.r_unit = self.r / np.linalg.norm(self.r, axis=1, keepdims=True)

    def state(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return propagate(self.sat.orbit, t)  # type: ignore[arg-type]


def _otws_from_track(track: _SatTrack, task: ObsTask, roll_lim: float, pitch_lim: float) -> list[Otw]:
    sat = track.sat
    p_ecef = geodetic_to_ecef(task.lat_rad, task.lon_rad)

    def angles(t: np.ndarray):
        r, v = track.state(t)
        return _angles(r, v, ecef_to_eci(p_ecef, t))

    def pred_vec(t: np.ndarray) -> np.ndarray:
        roll, pitch, vis = angles(t)
        return vis & (np.abs(roll) <= roll_lim) & (np.abs(pitch) <= pitch_lim)

    def pred_scalar(t: float) -> bool:
        return bool(pred_vec(np.array([t]))[0])

    alt = float(np.min(np.linalg.norm(track.r, axis=1))) - EARTH_RADIUS_KM
    off_nadir = math.atan(math.hypot(math.tan(roll_lim), math.tan(pitch_lim)))
    central = _central_angle(alt, off_nadir) + 2.0 * DEG
    idx = _candidate_idx(track.r_unit, p_ecef, track.times, central)
    windows = []
    for a, b in _intervals(pred_vec, pred_scalar, track.times, idx, track.horizon):
        w = _fit_window(angles, a, b, pitch_lim)
        if w is not None:
            windows.append(w)
    return [
        Otw(task.id, sat.id, k, ta, tb, roll, p0, slope) for k, (ta, tb, roll, p0, slope) in enumerate(windows)
    ]


def _central_angle(alt_km: float, off_nadir_rad: float) -> float:
    """Earth central angle between sub-satellite point and the boresight ground point."""
    R = EARTH_RADIUS_KM
    s = (R + alt_km) / R * math.sin(off_nadir_rad)
    if s >= 1.0:
        return math.acos(R / (R + alt_km))
    return math.asin(s) - off_nadir_rad


def _fit_window(angles, a: float, b: float, pitch_lim: float):
    ts = np.unique(np.concatenate([[a], np.arange(math.ceil(a), b, SAMPLE_STEP_S), [b]]))
    roll, pitch, _ = angles(ts)
    # least-squares pitch line about the window opening
    A = np.stack([np.ones_like(ts), ts - a], axis=1)
    (c0, c1), *_ = np.linalg.lstsq(A, pitch, rcond=None)
    # roll at the zero-pitch (closest approach) instant, else at min |pitch|
    sign = np.sign(pitch)
    cross = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if len(cross):
        i = int(cross[0])
        lo, hi = float(ts[i]), float(ts[i + 1])
        p_lo = pitch[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pm = angles(np.array([mid]))[1][0]
            if np.sign(pm) == np.sign(p_lo) and pm != 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-4:
                break
        roll0 = float(angles(np.array([0.5 * (lo + hi)]))[0][0])
    else:
        roll0 = float(roll[int(np.argmin(np.abs(pitch)))])
    # clip so the linear model stays within the pitch limit
    lim = pitch_lim - _CLIP_MARGIN_RAD
    ta, tb = a, b
    if abs(c1) > 0:
        t_hi = a + (lim - c0) / c1  # where model == +lim
        t_lo = a + (-lim - c0) / c1  # where model == -lim
        lo_t, hi_t = min(t_hi, t_lo), max(t_hi, t_lo)
        ta, tb = max(ta, lo_t), min(tb, hi_t)
    elif abs(c0) > lim:
        return None
    ta_q, tb_q = q9(ta), q9(tb)
    while ta_q < ta:
        ta_q = q9(ta_q + 1e-4)
    while tb_q > tb:
        tb_q = q9(tb_q - 1e-4)
    if tb_q - ta_q < 1e-3:
        return None
    slope = q9(c1)
    p0 = q9(c0 + c1 * (ta_q - a))
    # guard quantization: shrink until the stored model is within limits
    for _ in range(1000):
        if abs(p0) <= pitch_lim and abs(p0 + slope * (tb_q - ta_q)) <= pitch_lim:
            break
        if abs(p0) > pitch_lim:
            ta_q = q9(ta_q + 1e-3)
            p0 = q9(c0 + c1 * (ta_q - a))
        else:
            tb_q = q9(tb_q - 1e-3)
        if tb_q - ta_q < 1e-3:
            return None
    return ta_q, tb_q, q9(roll0), p0, slope


def extract_otws(sat: Satellite, task: ObsTask, horizon: float, *, _track: Optional[_SatTrack] = None) -> list[Otw]:
    """Observation windows of ``task`` on ``sat`` over ``[0, horizon]``.

    A window is a maximal interval in which the target is visible and the
    required roll and pitch are both within the effective limits.
    """
    track = _track if _track is not None else _SatTrack(sat, horizon)
    alpha = task.user_angle_limit_rad
    roll_lim = sat.roll_limit_rad if alpha is None else min(sat.roll_limit_rad, alpha)
    pitch_lim = sat.pitch_limit_rad if alpha is None else min(sat.pitch_limit_rad, alpha)
    return _otws_from_track(track, task, roll_lim, pitch_lim)


def extract_dtws(
    sat: Satellite, station: GroundStation, horizon: float, *, download_id: Optional[str] = None,
    _track: Optional[_SatTrack] = None,
) -> list[Dtw]:
    """Contacts where the satellite elevation at the station is at least its mask."""
    track = _track if _track is not None else _SatTrack(sat, horizon)
    min_el = station.min_elevation_rad
    did = download_id if download_id is not None else f"d-{station.id}"
    if min_el >= math.pi / 2:
        return []

    def pred_vec(t: np.ndarray) -> np.ndarray:
        r, _ = track.state(t)
        return elevation(r, station, t) >= min_el

    def pred_scalar(t: float) -> bool:
        return bool(pred_vec(np.array([t]))[0])

    p_ecef = geodetic_to_ecef(station.lat_rad, station.lon_rad, station.alt_km)
    alt = float(np.min(np.linalg.norm(track.r, axis=1))) - EARTH_RADIUS_KM
    central = math.acos(EARTH_RADIUS_KM / (EARTH_RADIUS_KM + alt) * math.cos(min_el)) - min_el + 2.0 * DEG
    idx = _candidate_idx(track.r_unit, p_ecef, track.times, central)
    out = []
    for a, b in _intervals(pred_vec, pred_scalar, track.times, idx, track.horizon):
        a_q, b_q = q9(a), q9(b)
        while a_q < a:
            a_q = q9(a_q + 1e-4)
        while b_q > b:
            b_q = q9(b_q - 1e-4)
        if b_q > a_q:
            out.append((a_q, b_q))
    return [Dtw(did, sat.id, station.id, l, a, b) for l, (a, b) in enumerate(out)]


# --------------------------------------------------------------------------
# Instance synthesis

TABLE2_ORBITS = [
    OrbitElements(6871.0, 0.0, q9(97.3 * DEG), q9(0.0), q9(0.0)),
    OrbitElements(6871.0, 0.0, q9(97.3 * DEG), q9(90 * DEG), q9(90 * DEG)),
    OrbitElements(6871.0, 0.0, q9(97.3 * DEG), q9(180 * DEG), q9(180 * DEG)),
    OrbitElements(6871.0, 0.0, q9(97.3 * DEG), q9(270 * DEG), q9(270 * DEG)),
]

PROCESS_TIME_S = {"spot": 3.0, "strip": 15.0}


def default_satellite(sat_id: str, orbit: Optional[OrbitElements] = None) -> Satellite:
    """Satellite with the reference scheduling parameters (30 deg limits, 1 deg/s)."""
    return Satellite(
        id=sat_id,
        roll_limit_rad=q9(30 * DEG),
        pitch_limit_rad=q9(30 * DEG),
        slew_rate_rad_per_s=q9(1 * DEG),
        stab_time_s=5.0,
        sat_prep_time_s=20.0,
        capacity_units=1000.0,
        initial_data_units=0.0,
        acq_rate_units_per_s=1.0,
        down_rate_units_per_s=5.0,
        orbit=orbit,
    )


@dataclass(frozen=True)
class SynthSpec:
    n_tasks: int = 50
    task_kind: str = "spot"
    # (lat_min, lat_max, lon_min, lon_max) in degrees; default covers East Asia
    region_deg: tuple[float, float, float, float] = (20.0, 50.0, 100.0, 145.0)
    n_satellites: int = 4
    n_stations: int = 2
    seed: int = 0
    priority_range: tuple[int, int] = (1, 5)
    stereo_fraction: float = 0.1
    stereo_beta_deg: float = 15.0
    horizon_s: float = 86400.0
    min_separation_km: float = 1.0

    def validate(self) -> None:
        if self.n_tasks <= 0 or self.n_satellites <= 0 or self.n_stations < 0:
            raise ValueError("counts must be positive")
        if self.task_kind not in PROCESS_TIME_S:
            raise ValueError(f"task_kind must be one of {sorted(PROCESS_TIME_S)}")
        lo, hi = self.priority_range
        if not (1 <= lo <= hi):
            raise ValueError("priority range must satisfy 1 <= lo <= hi")
        if not (0.0 <= self.stereo_fraction <= 1.0):
            raise ValueError("stereo_fraction must be in [0, 1]")
        la0, la1, lo0, lo1 = self.region_deg
        if la0 > la1 or lo0 > lo1:
            raise ValueError("region bounds inverted")


def _constellation(n: int) -> list[OrbitElements]:
    if n <= len(TABLE2_ORBITS):
        return TABLE2_ORBITS[:n]
    return [
        OrbitElements(6871.0, 0.0, q9(97.3 * DEG), q9(2 * math.pi * k / n), q9(2 * math.pi * k / n))
        for k in range(n)
    ]


def _gc_km(lat1, lon1, lat2, lon2) -> float:
    c = math.sin(lat1) * math.sin(lat2) + math.cos(lat1) * math.cos(lat2) * math.cos(lon1 - lon2)
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, c)))


def _place_points(rng: np.random.Generator, n: int, spec: SynthSpec, existing: Sequence[tuple[float, float]] = ()):
    la0, la1, lo0, lo1 = spec.region_deg
    pts: list[tuple[float, float]] = []
    tries = 0
    while len(pts) < n:
        tries += 1
        if tries > 200 * n + 1000:
            raise ValueError(f"region too small to place {n} distinct targets")
        # uniform in lat/lon box
        lat = q9(rng.uniform(la0, la1) * DEG)
        lon = q9(rng.uniform(lo0, lo1) * DEG)
        if all(_gc_km(lat, lon, a, b) >= spec.min_separation_km for a, b in list(existing) + pts):
            pts.append((lat, lon))
    return pts


def synth_instance(spec: SynthSpec) -> Instance:
    """Random instance with the reference constellation and task mix; deterministic in ``spec.seed``."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    horizon = q9(spec.horizon_s)
    sats = [default_satellite(f"S{i + 1}", orb) for i, orb in enumerate(_constellation(spec.n_satellites))]
    tgt_pts = _place_points(rng, spec.n_tasks, spec)
    st_pts = _place_points(rng, spec.n_stations, spec) if spec.n_stations else []
    lo, hi = spec.priority_range
    prios = rng.integers(lo, hi + 1, size=spec.n_tasks)
    n_stereo = int(round(spec.stereo_fraction * spec.n_tasks))
    stereo_idx = set(int(i) for i in rng.choice(spec.n_tasks, size=n_stereo, replace=False)) if n_stereo else set()
    tp = PROCESS_TIME_S[spec.task_kind]
    width = max(3, len(str(spec.n_tasks)))
    tasks = []
    for i, (lat, lon) in enumerate(tgt_pts):
        stereo = i in stereo_idx
        tasks.append(
            ObsTask(
                id=f"T{i + 1:0{width}d}",
                priority=int(prios[i]),
                lat_rad=lat,
                lon_rad=lon,
                process_time_s={s.id: tp for s in sats},
                imaging="stereo" if stereo else "mono",
                beta_rad=q9(spec.stereo_beta_deg * DEG) if stereo else None,
            )
        )
    stations = [GroundStation(f"G{j + 1}", lat, lon, 0.0, 60.0, q9(5 * DEG)) for j, (lat, lon) in enumerate(st_pts)]
    otws: list[Otw] = []
    dtws: list[Dtw] = []
    for sat in sats:
        track = _SatTrack(sat, horizon)
        for task in tasks:
            otws.extend(extract_otws(sat, task, horizon, _track=track))
        for g in stations:
            dtws.extend(extract_dtws(sat, g, horizon, _track=track))
    return Instance(GlobalParams(horizon), tuple(sats), tuple(stations), tuple(tasks), tuple(otws), tuple(dtws))


def random_window_instance(
    seed: int,
    n_tasks: int = 5,
    n_sats: int = 2,
    max_windows_per_task: int = 2,
    n_dtws: int = 2,
    horizon_s: float = 600.0,
    stereo_prob: float = 0.2,
    capacity_units: Optional[float] = None,
    n_stations: int = 1,
) -> Instance:
    """Small instance with abstract windows packed into a short horizon.

    Used for exhaustive cross-checks: windows overlap heavily, so ordering,
    stereo and (when ``capacity_units`` is small) capacity constraints bind.
    """
    rng = np.random.default_rng(seed)
    sats = []
    for i in range(n_sats):
        s = default_satellite(f"S{i + 1}")
        cap = capacity_units if capacity_units is not None else 1000.0
        sats.append(
            Satellite(
                s.id, s.roll_limit_rad, s.pitch_limit_rad, s.slew_rate_rad_per_s, s.stab_time_s,
                s.sat_prep_time_s, cap, 0.0, 1.0, 5.0,
            )
        )
    stations = [GroundStation(f"G{j + 1}", 0.0, 0.0) for j in range(n_stations)]
    lim = 30 * DEG
    tasks, otws = [], []
    for i in range(n_tasks):
        stereo = bool(rng.random() < stereo_prob)
        tid = f"T{i + 1}"
        tp = {s.id: float(rng.choice([3.0, 15.0])) for s in sats}
        tasks.append(
            ObsTask(tid, int(rng.integers(1, 6)), 0.0, 0.0, tp, "stereo" if stereo else "mono",
                    q9(15 * DEG) if stereo else None)
        )
        nw = int(rng.integers(1, max_windows_per_task + 1))
        counts: dict[str, int] = {}
        for _ in range(nw):
            s = sats[int(rng.integers(0, n_sats))].id
            length = round(float(rng.uniform(20.0, 90.0)), 3)
            ta = round(float(rng.uniform(0.0, horizon_s - length)), 3)
            p0 = q9(float(rng.uniform(0.3, 1.0)) * lim)
            p1 = -q9(float(rng.uniform(0.3, 1.0)) * lim)
            slope = q9((p1 - p0) / length)
            # keep the quantized model inside the limit at the close
            while abs(p0 + slope * length) > lim:
                slope = q9(slope * (1 - 1e-7))
            roll = q9(float(rng.uniform(-0.8, 0.8)) * lim)
            k = counts.get(s, 0)
            counts[s] = k + 1
            otws.append(Otw(tid, s, k, ta, round(ta + length, 3), roll, p0, slope))
    dtws = []
    dcount: dict[tuple[str, str], int] = {}
    for _ in range(n_dtws):
        s = sats[int(rng.integers(0, n_sats))].id
        g = stations[int(rng.integers(0, n_stations))].id
        length = round(float(rng.uniform(10.0, 60.0)), 3)
        ta = round(float(rng.uniform(0.0, horizon_s - length)), 3)
        did = f"d-{g}"
        l = dcount.get((did, s), 0)
        dcount[(did, s)] = l + 1
        dtws.append(Dtw(did, s, g, l, ta, round(ta + length, 3)))
    return Instance(GlobalParams(float(horizon_s)), tuple(sats), tuple(stations), tuple(tasks), tuple(otws), tuple(dtws))
