from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agilesched.domain import Download, Observation, Schedule
from agilesched.heuristic import solve_fifo
from agilesched.scengen import random_window_instance
from agilesched.validator import FAMILIES, StructuralError, buffer_trajectory, family_of, validate_schedule

from helpers import DEG, TICK, dtw, instance, otw, sat, station, stepped_levels, task

# ---------------------------------------------------------------------------
# A hand-built instance on which every family is exercised but satisfied.


def base_case():
    inst = instance(
        [sat("S1", cap=12.0), sat("S2", init=10.0)],
        [task("T1", w=2), task("T2", w=1), task("T3", w=3, beta_deg=15.0), task("T4", w=1)],
        [
            otw("T1", "S1", 0, 0.0, 100.0),
            otw("T2", "S1", 0, 0.0, 1000.0, roll_deg=10.0),
            otw("T3", "S1", 0, 200.0, 300.0, pitch0_deg=20.0),
            otw("T3", "S1", 1, 400.0, 500.0, slope_deg=0.1),
            otw("T4", "S1", 0, 0.0, 1000.0),
        ],
        [
            dtw("dA", "S1", "G1", 0, 600.0, 700.0),
            dtw("dB", "S2", "G1", 0, 600.0, 900.0),
            dtw("dC", "S1", "G2", 0, 600.0, 900.0),
        ],
        stations=[station("G1", 60.0), station("G2", 60.0)],
        horizon=1200.0,
    )
    w = inst.otw_by_key
    sch = Schedule(
        (
            Observation("T1", 1, "S1", 0, 10.0, 0.0),
            Observation("T2", 1, "S1", 0, 50.0, 0.0),
            Observation("T3", 1, "S1", 0, 210.0, 20.0 * DEG),
            Observation("T3", 2, "S1", 1, 410.0, w[("T3", "S1", 1)].pitch_at(410.0)),
        ),
        (
            Download("dA", "S1", 0, 600.0, 601.0),
            Download("dB", "S2", 0, 661.0, 662.0),
            Download("dC", "S1", 0, 621.0, 622.0),
        ),
    )
    return inst, sch


def _obs(sch, i, **kw):
    obs = list(sch.observations)
    obs[i] = replace(obs[i], **kw)
    return Schedule(tuple(obs), sch.downloads)


def _dl(sch, i, **kw):
    dls = list(sch.downloads)
    dls[i] = replace(dls[i], **kw)
    return Schedule(sch.observations, tuple(dls))


def _mutations(inst, sch):
    w3 = inst.otw_by_key[("T3", "S1", 1)]
    return {
        "Assignment": _obs(sch, 0, component=2),
        "ObsWindow": _obs(sch, 0, t_start_s=-1.0),
        "DlWindow": _dl(sch, 2, t_start_s=899.5, t_end_s=900.5),
        "ObsOverlap": _obs(sch, 1, t_start_s=27.0),
        "GsOverlap": _dl(sch, 1, t_start_s=650.0, t_end_s=651.0),
        "SatDlOverlap": _dl(sch, 2, t_start_s=610.0, t_end_s=611.0),
        "Capacity": Schedule(sch.observations + (Observation("T4", 1, "S1", 0, 450.0, 0.0),), sch.downloads),
        "BufferNonneg": _dl(sch, 2, t_end_s=624.0),
        "Stereo": _obs(sch, 3, t_start_s=460.0, pitch_rad=w3.pitch_at(460.0)),
        "PitchLink": _obs(sch, 0, pitch_rad=0.001),
    }


def test_base_case_passes():
    inst, sch = base_case()
    v = validate_schedule(inst, sch)
    assert v.passed, v.render()
    assert v.objective == 6


def test_mutations_cover_every_family():
    inst, sch = base_case()
    assert set(_mutations(inst, sch)) == set(FAMILIES)


@pytest.mark.parametrize("family", FAMILIES)
def test_single_family_mutation(family):
    inst, sch = base_case()
    v = validate_schedule(inst, _mutations(inst, sch)[family])
    assert not v.passed
    assert family_of(v.findings) == family, v.render()


def test_stereo_margin_is_minus_one_degree():
    inst, sch = base_case()
    v = validate_schedule(inst, _mutations(inst, sch)["Stereo"])
    (f,) = v.findings
    assert f.margin == pytest.approx(-1.0 * DEG, abs=1e-9)


def test_exact_transition_boundary():
    inst = instance([sat()], [task("A"), task("B")], [otw("A", "S1", 0, 0.0, 100.0), otw("B", "S1", 0, 0.0, 100.0, roll_deg=10.0)])
    req = 3.0 + 5.0 + 10.0
    ok = Schedule((Observation("A", 1, "S1", 0, 0.0, 0.0), Observation("B", 1, "S1", 0, req, 0.0)))
    assert validate_schedule(inst, ok).passed
    bad = Schedule((Observation("A", 1, "S1", 0, 0.0, 0.0), Observation("B", 1, "S1", 0, req - 0.01, 0.0)))
    (f,) = validate_schedule(inst, bad).findings
    assert f.family == "ObsOverlap"
    assert f.margin == pytest.approx(-0.01, abs=1e-9)


def test_empty_schedule_passes():
    inst, _ = base_case()
    v = validate_schedule(inst, Schedule())
    assert v.passed and v.objective == 0


def test_unknown_reference_is_structural():
    inst, _ = base_case()
    with pytest.raises(StructuralError):
        validate_schedule(inst, Schedule((Observation("T9", 1, "S1", 0, 0.0, 0.0),)))


def test_buffer_example_arithmetic():
    inst = instance(
        [sat(init=4.0)], [task("A")], [otw("A", "S1", 0, 0.0, 100.0)], [dtw("d", "S1", "G1", 0, 100.0, 200.0)]
    )
    sch = Schedule((Observation("A", 1, "S1", 0, 10.0, 0.0),), (Download("d", "S1", 0, 100.0, 110.0),))
    traj = buffer_trajectory(inst, sch, "S1")
    assert max(v for _, v in traj.points) == pytest.approx(7.0)
    assert traj.final_units == pytest.approx(7.0 - 50.0)
    assert family_of(validate_schedule(inst, sch).findings) == "BufferNonneg"


def test_constant_level_without_activity():
    inst = instance([sat(init=3.0)], [task("A")], [otw("A", "S1", 0, 0.0, 100.0)])
    traj = buffer_trajectory(inst, Schedule(), "S1")
    assert {v for _, v in traj.points} == {3.0}


# ---------------------------------------------------------------------------
# Time-stepping oracle for the buffer level

@given(
    st.lists(st.tuples(st.integers(0, 4000), st.sampled_from([3.0, 15.0])), max_size=5),
    st.lists(st.tuples(st.integers(0, 4000), st.integers(1, 600)), max_size=3),
    st.floats(0.0, 50.0),
)
def test_buffer_matches_time_stepping(obs_ticks, sess, init):
    inst = instance(
        [sat(init=init, cap=1000.0)],
        [task(f"T{i}", tp=tp) for i, (_, tp) in enumerate(obs_ticks)],
        [otw(f"T{i}", "S1", 0, 0.0, 100.0) for i in range(len(obs_ticks))],
        [dtw("d", "S1", "G1", i, 0.0, 100.0) for i in range(len(sess))],
        horizon=100.0,
    )
    obs = tuple(Observation(f"T{i}", 1, "S1", 0, k * TICK, 0.0) for i, (k, _) in enumerate(obs_ticks))
    dls = tuple(Download("d", "S1", i, a * TICK, min(a + n, 10000) * TICK) for i, (a, n) in enumerate(sess))
    traj = buffer_trajectory(inst, Schedule(obs, dls), "S1")
    ends = [(k + int(round(tp / TICK)), tp) for k, tp in obs_ticks]
    spans = [(a, min(a + n, 10000)) for a, n in sess]
    horizon_ticks = max([10000] + [e for e, _ in ends])
    before, after = stepped_levels(init, 1.0, 5.0, ends, spans, horizon_ticks)
    for t, v in traj.points:
        k = int(round(t / TICK))
        assert min(abs(v - before[k]), abs(v - after[k])) < 1e-6


@given(st.integers(0, 10_000))
def test_fifo_schedules_pass(seed):
    inst = random_window_instance(seed, n_tasks=6, max_windows_per_task=3, capacity_units=12.0)
    rep = solve_fifo(inst)
    assert validate_schedule(inst, rep.schedule).passed
