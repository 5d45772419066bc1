import pytest
from hypothesis import given
from hypothesis import strategies as st

from agilesched.heuristic import (
    cluster_windows,
    lambda_lower_bound,
    max_slew_time,
    prune_clusters,
    solve_fifo,
    solve_heuristic,
)
from agilesched.milp import build_model
from agilesched.scengen import SynthSpec, random_window_instance, synth_instance
from agilesched.solver.bnb import solve_exact
from agilesched.validator import validate_schedule

from helpers import DEG, instance, otw, sat, task


def test_max_slew_examples():
    assert max_slew_time(30 * DEG, 30 * DEG, 1 * DEG) == 120.0
    assert max_slew_time(0.0, 0.0, 1 * DEG) == 0.0
    assert max_slew_time(45 * DEG, 30 * DEG, 0.5 * DEG) == 300.0
    with pytest.raises(ValueError):
        max_slew_time(1.0, 1.0, 0.0)


def _chain(opens, length=10.0):
    tasks = [task(f"T{i}") for i in range(len(opens))]
    ws = [otw(f"T{i}", "S1", 0, a, a + length) for i, a in enumerate(opens)]
    return instance([sat()], tasks, ws, horizon=2000.0)


def test_wide_gap_gives_no_cluster():
    assert cluster_windows(_chain([0.0, 210.0])) == []


def test_chain_of_three():
    (cl,) = cluster_windows(_chain([0.0, 60.0, 120.0]))
    assert len(cl) == 3


def pairwise_closure(inst):
    """Union windows i, j on one satellite when the later one opens within max slew of the other's close."""
    ws = list(inst.otws)
    parent = list(range(len(ws)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(ws):
        s = inst.sat_by_id[a.sat]
        lim = max_slew_time(s.roll_limit_rad, s.pitch_limit_rad, s.slew_rate_rad_per_s)
        for j, b in enumerate(ws):
            if i < j and a.sat == b.sat:
                first, second = (a, b) if (a.t_open_s, a.key) <= (b.t_open_s, b.key) else (b, a)
                if second.t_open_s - first.t_close_s < lim:
                    parent[find(i)] = find(j)
    groups = {}
    for i, w in enumerate(ws):
        groups.setdefault(find(i), set()).add(w.key)
    return sorted(sorted(g) for g in groups.values() if len(g) > 1)


@pytest.mark.parametrize("seed", [1, 2])
def test_clusters_match_pairwise_closure(seed):
    inst = synth_instance(SynthSpec(n_tasks=50, seed=seed))
    got = sorted(sorted(w.key for w in cl.members) for cl in cluster_windows(inst))
    assert got == pairwise_closure(inst)


@given(st.integers(0, 10_000))
def test_clusters_match_pairwise_closure_dense(seed):
    inst = random_window_instance(seed, n_tasks=8, max_windows_per_task=3, horizon_s=900.0)
    got = sorted(sorted(w.key for w in cl.members) for cl in cluster_windows(inst))
    assert got == pairwise_closure(inst)


def _lambda_case(avg_len, tp, stab):
    s = sat(stab=stab)
    tasks = [task("A", tp=tp), task("B", tp=tp)]
    ws = [otw("A", "S1", 0, 0.0, avg_len - 10.0), otw("B", "S1", 0, 1000.0, 1000.0 + avg_len + 10.0)]
    return instance([s], tasks, ws, horizon=5000.0)


def test_lambda_examples():
    assert lambda_lower_bound(_lambda_case(600.0, 3.0, 5.0)) == 75
    assert lambda_lower_bound(_lambda_case(90.0, 10.0, 5.0)) == 6


def test_lambda_needs_windows():
    with pytest.raises(ValueError):
        lambda_lower_bound(instance([sat()], [task("A")]))


def _far_windows(tids, start=1500.0):
    """One extra window per task, far from everything else."""
    return [otw(t, "S1", 1, start + 400.0 * i, start + 400.0 * i + 10.0) for i, t in enumerate(tids)]


def test_priority_order_retention():
    prios = [5, 5, 4, 3, 2, 1]
    tids = [f"T{i}" for i in range(6)]
    tasks = [task(t, w=w) for t, w in zip(tids, prios)]
    ws = [otw(t, "S1", 0, 10.0 * i, 10.0 * i + 30.0) for i, t in enumerate(tids)] + _far_windows(tids)
    inst = instance([sat()], tasks, ws, horizon=5000.0)
    pr = prune_clusters(inst, 4)
    kept = sorted((inst.task_by_id[k[0]].priority for k in pr.retained if k[2] == 0), reverse=True)
    assert kept == [5, 5, 4, 3]
    assert pr.rescued == 0


def test_roll_closeness_tie_break():
    tids = ["A", "B", "C", "D"]
    tasks = [task("A", w=5), task("B", w=4), task("C", w=3), task("D", w=3)]
    rolls = [10.0, 20.0, 14.0, 30.0]
    ws = [otw(t, "S1", 0, 10.0 * i, 10.0 * i + 30.0, roll_deg=r) for i, (t, r) in enumerate(zip(tids, rolls))]
    inst = instance([sat()], tasks, ws + _far_windows(tids), horizon=5000.0)
    pr = prune_clusters(inst, 3)
    assert {k[0] for k in pr.retained if k[2] == 0} == {"A", "B", "C"}


def test_no_task_loses_all_windows():
    tids = [f"T{i}" for i in range(5)]
    tasks = [task(t, w=5 - i) for i, t in enumerate(tids)]
    ws = [otw(t, "S1", 0, 10.0 * i, 10.0 * i + 30.0) for i, t in enumerate(tids)]
    inst = instance([sat()], tasks, ws, horizon=5000.0)
    pr = prune_clusters(inst, 2)
    assert {k[0] for k in pr.retained} == set(tids)
    assert pr.rescued == 3


def test_lambda_must_be_positive():
    with pytest.raises(ValueError):
        prune_clusters(_chain([0.0, 10.0]), 0)


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_pruning_is_nested(seed, lam):
    inst = random_window_instance(seed, n_tasks=8, max_windows_per_task=3, horizon_s=900.0)
    a = prune_clusters(inst, lam)
    b = prune_clusters(inst, lam + 1)
    assert a.retained <= b.retained
    # every task that had a window keeps one
    assert {k[0] for k in a.retained} == {w.task for w in inst.otws}
    # clusters hold at most lambda windows beyond the rescued ones
    for cl in a.clusters:
        kept = [w for w in cl.members if w.key in a.retained]
        assert len(kept) <= lam + a.rescued


def test_no_clusters_means_identical_schedule():
    inst = _chain([0.0, 500.0, 1000.0])
    assert cluster_windows(inst) == []
    h = solve_heuristic(inst, 1)
    e = solve_exact(build_model(inst))
    assert h.schedule == e.schedule


@given(st.integers(0, 10_000))
def test_heuristic_and_fifo_dominated_by_exact(seed):
    inst = random_window_instance(seed, n_tasks=6, max_windows_per_task=3, capacity_units=12.0)
    e = solve_exact(build_model(inst))
    prev = -1.0
    for lam in (1, 2, 3):
        h = solve_heuristic(inst, lam)
        assert validate_schedule(inst, h.schedule).passed
        assert prev <= h.objective <= e.objective
        prev = h.objective
        assert h.stats["lambda"] == lam
    f = solve_fifo(inst)
    assert validate_schedule(inst, f.schedule).passed
    assert f.objective <= e.objective


def test_fifo_single_task_at_open():
    inst = instance([sat()], [task("A", w=3)], [otw("A", "S1", 0, 25.0, 80.0)])
    rep = solve_fifo(inst)
    (o,) = rep.schedule.observations
    assert o.t_start_s == 25.0 and rep.objective == 3


def test_fifo_transition_blocks_later_task():
    inst = instance(
        [sat()], [task("A"), task("B")],
        [otw("A", "S1", 0, 0.0, 10.0, roll_deg=10.0), otw("B", "S1", 0, 5.0, 12.0, roll_deg=-10.0)],
    )
    rep = solve_fifo(inst)
    assert [o.task for o in rep.schedule.observations] == ["A"]


def test_fifo_waits_for_transition():
    inst = instance(
        [sat()], [task("A"), task("B")],
        [otw("A", "S1", 0, 0.0, 10.0), otw("B", "S1", 0, 5.0, 100.0, roll_deg=10.0)],
    )
    rep = solve_fifo(inst)
    b = next(o for o in rep.schedule.observations if o.task == "B")
    assert b.t_start_s == pytest.approx(3.0 + 5.0 + 10.0)


def test_fifo_stereo_needs_both_components():
    inst = instance(
        [sat()], [task("A", w=4, beta_deg=15.0)],
        [otw("A", "S1", 0, 0.0, 10.0, pitch0_deg=20.0), otw("A", "S1", 1, 100.0, 110.0, pitch0_deg=0.0)],
    )
    rep = solve_fifo(inst)
    assert {o.component for o in rep.schedule.observations} == {1, 2}
    inst_bad = instance(
        [sat()], [task("A", w=4, beta_deg=15.0)],
        [otw("A", "S1", 0, 0.0, 10.0, pitch0_deg=5.0), otw("A", "S1", 1, 100.0, 110.0, pitch0_deg=0.0)],
    )
    assert solve_fifo(inst_bad).schedule.observations == ()


def test_fifo_is_deterministic(synth30):
    assert solve_fifo(synth30).schedule == solve_fifo(synth30).schedule
