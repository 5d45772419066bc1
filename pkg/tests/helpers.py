"""Small builders for hand-made instances and shared independent oracles."""

import math

import numpy as np

from agilesched.domain import (
    Dtw,
    GlobalParams,
    GroundStation,
    Instance,
    ObsTask,
    Otw,
    Satellite,
)

DEG = math.pi / 180.0
TICK = 0.01


def sat(sid="S1", *, cap=1000.0, init=0.0, stab=5.0, prep=20.0, rate_deg=1.0, lim_deg=30.0, zeta=1.0, gamma=5.0):
    return Satellite(sid, lim_deg * DEG, lim_deg * DEG, rate_deg * DEG, stab, prep, cap, init, zeta, gamma)


def station(gid="G1", prep=60.0):
    return GroundStation(gid, 0.0, 0.0, 0.0, prep)


def task(tid, w=1, tp=3.0, sats=("S1",), beta_deg=None):
    if beta_deg is None:
        return ObsTask(tid, w, 0.0, 0.0, {s: tp for s in sats})
    return ObsTask(tid, w, 0.0, 0.0, {s: tp for s in sats}, imaging="stereo", beta_rad=beta_deg * DEG)


def otw(tid, sid, k, a, b, roll_deg=0.0, pitch0_deg=0.0, slope_deg=0.0):
    return Otw(tid, sid, k, a, b, roll_deg * DEG, pitch0_deg * DEG, slope_deg * DEG)


def dtw(did, sid, gid, k, a, b):
    return Dtw(did, sid, gid, k, a, b)


def instance(sats, tasks, otws=(), dtws=(), stations=None, horizon=600.0):
    if stations is None:
        stations = (station(),)
    return Instance(GlobalParams(horizon), tuple(sats), tuple(stations), tuple(tasks), tuple(otws), tuple(dtws))


def rk4_orbit(r0, v0, t_end, dt=1.0, mu=398600.4418):
    """Fixed-step fourth-order integration of the two-body equations."""

    def f(y):
        r = y[:3]
        return np.concatenate([y[3:], -mu * r / np.linalg.norm(r) ** 3])

    y = np.concatenate([r0, v0])
    n = int(round(t_end / dt))
    h = t_end / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y[:3], y[3:]


def stepped_levels(init, zeta, gamma, obs, sessions, n_ticks):
    """Buffer level before and after the jumps at every tick, stepping 0.01 s at a time.

    ``obs`` is a list of (end_tick, process_s); ``sessions`` of (start_tick, end_tick).
    """
    jumps = {}
    for end, tp in obs:
        jumps[end] = jumps.get(end, 0.0) + zeta * tp
    before, after = [], []
    level = init
    for k in range(n_ticks + 1):
        before.append(level)
        level += jumps.get(k, 0.0)
        after.append(level)
        active = sum(1 for a, b in sessions if a <= k and b >= k + 1)
        level -= gamma * active * TICK
    return before, after
