import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agilesched.domain import (
    Download,
    InstanceError,
    Observation,
    Schedule,
    SolveReport,
    check_instance,
    parse_instance,
    parse_schedule,
    schedule_objective,
    write_instance,
    write_schedule,
)
from agilesched.scengen import SynthSpec, synth_instance

from helpers import DEG, instance, otw, sat, task


def minimal():
    return instance([sat()], [task("T1", w=3)], [otw("T1", "S1", 0, 10.0, 100.0)])


def test_minimal_instance_parses():
    inst = parse_instance(write_instance(minimal()))
    assert len(inst.tasks) == 1 and len(inst.satellites) == 1
    assert check_instance(inst) == []


def test_inverted_window_rejected():
    obj = json.loads(write_instance(minimal()))
    obj["otws"][0]["t_open_s"] = 200.0
    with pytest.raises(InstanceError, match="window inverted"):
        parse_instance(json.dumps(obj))


def test_syntax_error_has_position():
    with pytest.raises(InstanceError, match="line"):
        parse_instance('{"params": ')


def test_unknown_reference_rejected():
    obj = json.loads(write_instance(minimal()))
    obj["otws"][0]["sat"] = "S9"
    with pytest.raises(InstanceError, match="unknown satellite"):
        parse_instance(json.dumps(obj))


def test_roll_over_limit_is_a_defect():
    inst = instance([sat()], [task("T1")], [otw("T1", "S1", 0, 10.0, 100.0, roll_deg=40.0)])
    assert any(d.rule == "roll exceeds limit" for d in check_instance(inst))


def test_initial_data_over_capacity_is_a_defect():
    inst = instance([sat(cap=10.0, init=20.0)], [task("T1")])
    assert any("initial data exceeds capacity" in d.rule for d in check_instance(inst))


def test_non_contiguous_indices_are_a_defect():
    inst = instance([sat()], [task("T1")], [otw("T1", "S1", 1, 10.0, 100.0)])
    assert any("contiguous" in d.rule for d in check_instance(inst))


def test_stereo_block_round_trips():
    inst = instance([sat()], [task("T1", beta_deg=15.0)], [otw("T1", "S1", 0, 10.0, 100.0)])
    text = write_instance(inst)
    obj = json.loads(text)
    assert obj["tasks"][0]["imaging"] == "stereo"
    assert obj["tasks"][0]["beta"] == pytest.approx(0.261799388, abs=1e-9)
    again = parse_instance(text)
    assert again.tasks[0].stereo and write_instance(again) == text


def test_generated_instance_round_trip_equality():
    inst = synth_instance(SynthSpec(n_tasks=100, seed=4, n_satellites=2, horizon_s=21600.0))
    assert parse_instance(write_instance(inst)) == inst


def test_reference_satellite_parameters():
    inst = parse_instance(write_instance(synth_instance(SynthSpec(n_tasks=50, seed=1))))
    assert inst.params.horizon_s == 86400.0
    for s in inst.satellites:
        assert s.slew_rate_rad_per_s == pytest.approx(1.0 * DEG, rel=1e-8)
    assert all(v.beta_rad == pytest.approx(15 * DEG, rel=1e-8) for v in inst.tasks if v.stereo)


@given(st.integers(0, 5), st.floats(0.0, 1e4), st.floats(-1.0, 1.0))
def test_schedule_round_trip(n, t0, pitch):
    obs = tuple(Observation(f"T{i}", 1, "S1", 0, t0 + 7.25 * i, pitch) for i in range(n))
    dls = (Download("d", "S1", 0, t0, t0 + 1.5),)
    sch = Schedule(obs, dls)
    assert parse_schedule(write_schedule(sch)) == sch


def test_index_sets_are_key_groups():
    inst = synth_instance(SynthSpec(n_tasks=20, seed=2))
    groups = {}
    for w in inst.otws:
        groups.setdefault((w.task, w.sat), []).append(w.index)
    assert {k: tuple(v) for k, v in groups.items()} == inst.otw_index_sets
    assert all(v == tuple(range(len(v))) for v in inst.otw_index_sets.values())


def test_objective_counts_stereo_once():
    inst = instance(
        [sat()], [task("T1", w=4, beta_deg=15.0), task("T2", w=2)],
        [otw("T1", "S1", 0, 0.0, 100.0), otw("T1", "S1", 1, 200.0, 300.0), otw("T2", "S1", 0, 0.0, 50.0)],
    )
    sch = Schedule((Observation("T1", 1, "S1", 0, 0.0, 0.0), Observation("T1", 2, "S1", 1, 200.0, 0.0)))
    assert schedule_objective(inst, sch) == 4


def test_gap_rendering():
    rep = SolveReport(Schedule(), 332.0, 335.32, "TimeLimit")
    assert rep.gap == pytest.approx(0.01)
    assert rep.render_objective() == "332 (1%)"
    assert SolveReport(Schedule(), 214.0, 214.0, "Optimal").render_objective() == "214"
    assert math.isclose(SolveReport(Schedule(), 0.0, 0.0, "Optimal").gap, 0.0)
