import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from agilesched.milp import MilpModel, build_model, export_lp, import_lp
from agilesched.scengen import SynthSpec, random_window_instance, synth_instance
from agilesched.solver import lp as lpmod
from agilesched.solver.bnb import BnbLimits, solve_exact
from agilesched.solver.lp import LpProblem
from agilesched.solver.oracle import OracleCaps, OracleRefused, enumerate_oracle
from agilesched.validator import validate_schedule

from helpers import instance, otw, sat, task


def knapsack(values, weights, cap):
    m = MilpModel(name="knap")
    xs = [m.add_var(f"x{i}", "B", 0, 1, obj=v) for i, v in enumerate(values)]
    m.add_row("cap", list(zip(xs, weights)), "<=", cap)
    return m


@given(
    st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9)), min_size=1, max_size=8),
    st.integers(1, 30),
)
def test_knapsack_matches_brute_force(items, cap):
    values = [v for v, _ in items]
    weights = [w for _, w in items]
    best = 0
    for pick in itertools.product((0, 1), repeat=len(items)):
        if sum(p * w for p, w in zip(pick, weights)) <= cap:
            best = max(best, sum(p * v for p, v in zip(pick, values)))
    rep = solve_exact(knapsack(values, weights, cap))
    assert rep.objective == best
    assert rep.status == "Optimal" and rep.gap == 0


def test_one_task_model():
    inst = instance([sat()], [task("T1", w=4)], [otw("T1", "S1", 0, 0.0, 50.0)])
    rep = solve_exact(build_model(inst))
    assert (rep.objective, rep.gap, rep.status) == (4, 0, "Optimal")


def test_limits_validation():
    with pytest.raises(ValueError):
        BnbLimits(time_limit_s=0)
    with pytest.raises(ValueError):
        BnbLimits(gap_tolerance=-1)
    with pytest.raises(ValueError):
        BnbLimits(node_limit=0)


def test_node_limit_reports_bound():
    m = knapsack([5, 4, 3, 7, 6, 2, 8, 3], [4, 3, 2, 6, 5, 1, 7, 3], 13)
    rep = solve_exact(m, BnbLimits(node_limit=1))
    assert rep.status == "TimeLimit"
    assert rep.dual_bound >= rep.objective
    full = solve_exact(m)
    assert full.objective <= rep.dual_bound


def test_on_incumbent_callback():
    seen = []
    solve_exact(knapsack([3, 4, 5], [2, 3, 4], 5), on_incumbent=lambda j, b: seen.append((j, b)))
    assert seen and all(b >= j for j, b in seen)
    assert [j for j, _ in seen] == sorted(j for j, _ in seen)


def scipy_milp_value(model: MilpModel) -> float:
    p = LpProblem.from_model(model)
    integrality = np.array([1 if k == "B" else 0 for k in model.var_kind])
    res = milp(
        -p.c, constraints=LinearConstraint(p.A, p.row_lo, p.row_hi), bounds=Bounds(p.lb, p.ub),
        integrality=integrality, options={"mip_rel_gap": 0.0},
    )
    assert res.status == 0
    return -res.fun


@pytest.mark.parametrize("kind,seed", [("spot", 1), ("strip", 2)])
def test_exported_model_matches_external_solver(kind, seed):
    inst = synth_instance(SynthSpec(n_tasks=20, task_kind=kind, seed=seed))
    model = build_model(inst)
    rep = solve_exact(model)
    assert validate_schedule(inst, rep.schedule).passed
    ext = scipy_milp_value(import_lp(export_lp(model)))
    assert rep.objective == pytest.approx(ext, abs=1e-6)


@pytest.mark.skipif(lpmod.BACKEND != "cython", reason="compiled kernel not built")
def test_kernels_agree_on_search():
    inst = random_window_instance(11, n_tasks=6, max_windows_per_task=3, capacity_units=12.0)
    m = build_model(inst)
    a = solve_exact(m, kernel=lpmod.kernel_module("python"))
    b = solve_exact(m, kernel=lpmod.kernel_module("cython"))
    assert a.objective == b.objective


# ---------------------------------------------------------------------------
# enumeration oracle


def test_oracle_empty():
    assert enumerate_oracle(instance([sat()], [])).objective == 0


def test_oracle_single_task():
    inst = instance([sat()], [task("T1", w=5)], [otw("T1", "S1", 0, 0.0, 10.0)])
    assert enumerate_oracle(inst).objective == 5


def test_oracle_unsatisfiable_stereo():
    # both windows keep pitch in [0, 10] deg, so no pair can differ by 15 deg
    inst = instance(
        [sat()], [task("T1", w=5, beta_deg=15.0)],
        [otw("T1", "S1", 0, 0.0, 10.0, pitch0_deg=10.0, slope_deg=-1.0), otw("T1", "S1", 1, 100.0, 110.0, pitch0_deg=5.0)],
    )
    assert enumerate_oracle(inst).objective == 0
    assert solve_exact(build_model(inst)).objective == 0


def test_oracle_refuses_large_instances():
    inst = random_window_instance(0, n_tasks=9)
    with pytest.raises(OracleRefused):
        enumerate_oracle(inst)
    with pytest.raises(OracleRefused):
        enumerate_oracle(random_window_instance(0, n_tasks=6), OracleCaps(max_leaves=1))


@given(st.integers(0, 10_000), st.booleans())
def test_oracle_witness_is_valid_and_optimal(seed, tight):
    inst = random_window_instance(seed, n_tasks=4, capacity_units=12.0 if tight else None)
    res = enumerate_oracle(inst)
    v = validate_schedule(inst, res.schedule)
    assert v.passed and v.objective == res.objective
    assert solve_exact(build_model(inst)).objective == res.objective
