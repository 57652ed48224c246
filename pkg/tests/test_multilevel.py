import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlmolp.errors import DimensionError, ReducedModelInfeasible
from mlmolp.lp import InequalityLP
from mlmolp.multilevel import (MultilevelProblem, alpha_grid, alpha_sweep, run_algorithm2,
                               solve_levels_independently)
from mlmolp.reduction import AlphaParams
from mlmolp.scenario import load_problem
from mlmolp.simplex import simplex_solve

from conftest import DATA
from helpers import random_problem


def toy2():
    return MultilevelProblem(partition=(1, 1), objectives=[[1, 0], [0, 1]], A=[[1, 1]], b=[1])


def test_problem_validation():
    with pytest.raises(DimensionError):
        MultilevelProblem(partition=(2,), objectives=[[1, 0]], A=[[1, 1]], b=[1])
    with pytest.raises(DimensionError):
        MultilevelProblem(partition=(1, 2), objectives=[[1, 0], [0, 1]], A=[[1, 1]], b=[1])
    with pytest.raises(DimensionError):
        MultilevelProblem(partition=(1, 1), objectives=[[1, 0], [0, 1]], A=[[1, 1]], b=[1, 2])


def test_coefficient_addressing(vaccine):
    # hospital (1, 4) weight in the level-3 objective; region 1 weight in level 2
    assert vaccine.coefficient(3, 3, 4) == 0.08
    assert vaccine.coefficient(2, 2, 1) == 0.4
    assert vaccine.coefficient(2, 1, 1) == 0.0
    with pytest.raises(DimensionError):
        vaccine.coefficient(2, 2, 5)


def test_toy_level_solutions():
    sols = solve_levels_independently(toy2())
    np.testing.assert_allclose(sols[0].x_opt, [1, 0])
    np.testing.assert_allclose(sols[1].x_opt, [0, 1])
    assert [s.f_max for s in sols] == [1.0, 1.0]


def test_adaptive_level_solutions_agree_with_simplex(vaccine):
    a = solve_levels_independently(vaccine, backend="adaptive")
    s = solve_levels_independently(vaccine, backend="simplex")
    np.testing.assert_allclose([x.f_max for x in a], [x.f_max for x in s], rtol=1e-9)
    assert {x.method for x in a} == {"adaptive"}


def test_zero_objectives():
    prob = MultilevelProblem(partition=(1, 1), objectives=np.zeros((2, 2)), A=[[1, 1]], b=[1])
    assert [s.f_max for s in solve_levels_independently(prob)] == [0.0, 0.0]


def test_vaccine_level_one(vaccine):
    sols = solve_levels_independently(vaccine)
    assert sols[0].f_max == pytest.approx(100.0, rel=1e-12)
    assert sols[1].f_max == pytest.approx(25.05, rel=1e-12)   # every region at its population cap
    np.testing.assert_allclose(sols[1].x_opt[1:5], [56.48, 5.45, 3.16, 1.91])


@pytest.mark.parametrize("backend", ["adaptive", "simplex"])
def test_toy_alpha_zero(backend):
    rep = run_algorithm2(toy2(), [0.0], backend)
    np.testing.assert_allclose(rep.compromise, [0, 1], atol=1e-12)
    np.testing.assert_allclose(rep.objective_values, [0, 1], atol=1e-12)
    assert len(rep.bounds_history) == 2


def test_identical_objectives_reach_first_level_optimum():
    prob = MultilevelProblem(partition=(1, 1), objectives=[[2, 1], [2, 1]], A=[[1, 1], [1, 0]],
                             b=[3, 2])
    rep = run_algorithm2(prob, [0.5])
    assert rep.objective_values[0] == pytest.approx(solve_levels_independently(prob)[0].f_max)


def test_vaccine_alpha_one_pins_x11(vaccine):
    sols = solve_levels_independently(vaccine)
    low = min(s.x_opt[0] for s in sols)
    rep = run_algorithm2(vaccine, [1.0, 0.0], "adaptive")
    b2 = rep.bounds_history[1]
    assert b2.l[0] == low and b2.u[0] == low
    assert rep.compromise[0] == pytest.approx(low, abs=1e-9)


def test_vaccine_chain_alpha_one_one_empties_level_three(vaccine):
    # the level-2 compromise sits on the lower ideal bound of every region;
    # alpha2 = 1 then forces every region to its population cap, which exceeds x11
    with pytest.raises(ReducedModelInfeasible) as exc:
        run_algorithm2(vaccine, [1.0, 1.0], "adaptive", anchor="chain")
    assert exc.value.level == 3
    assert exc.value.report.failed_level == 3
    rep = run_algorithm2(vaccine, [1.0, 1.0], "adaptive", anchor="independent")
    assert rep.ok


def test_toy3_infeasible_names_level():
    prob = load_problem(DATA / "toy3_infeasible.json")
    with pytest.raises(ReducedModelInfeasible, match="level 3"):
        run_algorithm2(prob, [1.0, 1.0])
    assert run_algorithm2(prob, [1.0, 0.0]).ok


def test_sweep_order_and_failures():
    prob = load_problem(DATA / "toy3_infeasible.json")
    grid = alpha_grid(2, values=[0.0, 1.0])
    reps = alpha_sweep(prob, grid)
    assert len(reps) == 8
    assert [(r.alphas, r.backend) for r in reps] == [
        (g.scalars(), be) for g in grid for be in ("adaptive", "simplex")]
    bad = [r for r in reps if not r.ok]
    assert {tuple(r.alphas) for r in bad} == {(1.0, 1.0)}
    assert all(r.failed_level == 3 for r in bad)


def test_singleton_sweep_equals_direct_run(vaccine):
    (rep,) = alpha_sweep(vaccine, [AlphaParams.per_level([0.25, 0.5])], backends=("simplex",))
    direct = run_algorithm2(vaccine, [0.25, 0.5], "simplex")
    np.testing.assert_array_equal(rep.compromise, direct.compromise)
    assert rep.iterations == direct.iterations


def test_parallel_sweep_matches_serial(vaccine):
    grid = alpha_grid(2, step=0.5)
    a = alpha_sweep(vaccine, grid, jobs=1)
    b = alpha_sweep(vaccine, grid, jobs=4)
    for x, y in zip(a, b):
        assert (x.alphas, x.backend, x.status) == (y.alphas, y.backend, y.status)
        if x.ok:
            np.testing.assert_array_equal(x.compromise, y.compromise)


def test_alpha_grid():
    assert len(alpha_grid(2, step=0.25)) == 25
    assert alpha_grid(1, values=[0, 1])[1].scalars() == [1.0]
    with pytest.raises(ValueError):
        alpha_grid(2, step=0.3)


def test_bad_arguments(vaccine):
    with pytest.raises(ValueError):
        run_algorithm2(vaccine, [0, 0], "interior-point")
    with pytest.raises(ValueError):
        run_algorithm2(vaccine, [0, 0], epsilon=-1)
    with pytest.raises(ValueError):
        alpha_sweep(vaccine, [])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.3, 0.75, 1.0]))
def test_compromise_feasible_and_backends_agree(seed, a):
    prob = random_problem(seed)
    alphas = [a] * (prob.P - 1)
    reps = {}
    for be in ("adaptive", "simplex"):
        try:
            reps[be] = run_algorithm2(prob, alphas, be)
        except ReducedModelInfeasible:
            reps[be] = None
    assert (reps["adaptive"] is None) == (reps["simplex"] is None)
    if reps["adaptive"] is None:
        return
    for rep in reps.values():
        assert prob.is_feasible(rep.compromise, 1e-8)
        for b in rep.bounds_history:
            assert b.contains(rep.compromise, 1e-8)
        for k in range(1, len(rep.bounds_history)):
            assert rep.bounds_history[k].nested_in(rep.bounds_history[k - 1])
    # each level's compromise objective must agree across backends
    for xa, xs, p in zip(reps["adaptive"].level_compromises, reps["simplex"].level_compromises,
                         range(2, prob.P + 1)):
        fa, fs = prob.objectives[p - 1] @ xa, prob.objectives[p - 1] @ xs
        assert fa == pytest.approx(fs, rel=1e-6, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans(), st.sampled_from(["chain", "independent"]))
def test_two_levels_never_empty(seed, gate, anchor):
    # with two levels the second optimum always survives the reduction
    prob = random_problem(seed, P=2, gate=gate)
    sols = solve_levels_independently(prob)
    rep = run_algorithm2(prob, [1.0], anchor=anchor, level_solutions=sols)
    assert rep.bounds_history[1].contains(sols[1].x_opt, 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_width_responds_monotonically_to_alpha(seed):
    prob = random_problem(seed, P=2)
    sols = solve_levels_independently(prob)
    widths = [run_algorithm2(prob, [a], "simplex", level_solutions=sols).bounds_history[1].width
              for a in (0.0, 0.25, 0.5, 0.75, 1.0)]
    for w0, w1 in zip(widths, widths[1:]):
        assert np.all(w1 <= w0 + 1e-12)


def test_determinism(vaccine):
    r1 = run_algorithm2(vaccine, [0.5, 0.75], "adaptive")
    r2 = run_algorithm2(vaccine, [0.5, 0.75], "adaptive")
    np.testing.assert_array_equal(r1.compromise, r2.compromise)
    assert r1.iterations == r2.iterations


def test_region_box_matches_lp_bounds():
    prob = load_problem(DATA / "toy3_infeasible.json")
    lp = InequalityLP(c=[1.0, 0.0, 0.0], A=prob.A, b=prob.b)
    assert simplex_solve(lp).objective == 1.0
