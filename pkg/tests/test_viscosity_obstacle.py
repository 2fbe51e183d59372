import numpy as np
import pytest

from twomembranes import (
    ABOVE,
    BELOW,
    NormalizedPLaplacian,
    ObstacleProblem,
    ScalarField,
    Variational,
    SchemeConfig,
    absent_obstacle,
    build_grid,
    classify,
    comparison_check,
    constant_field,
    local_solve,
    sample,
    solve_visc_obstacle,
)
from twomembranes import _kernels

G = build_grid(1, 201)


def problem(alpha, beta, h, f, side=BELOW, obstacle=None, grid=G):
    return ObstacleProblem(
        spec=NormalizedPLaplacian(alpha=alpha, beta=beta, source=sample(grid, h)),
        side=side,
        obstacle=absent_obstacle(grid, side) if obstacle is None else obstacle,
        boundary=sample(grid, f),
    )


# ---------------------------------------------------------------- local_solve

def test_local_solve_is_the_mean_without_source():
    assert local_solve([0.2, 0.4], [0.2, 0.4], 0.0, 0.01,
                       NormalizedPLaplacian(0.0, 1.0, constant_field(G, 0.0))) \
        == pytest.approx(0.3, abs=1e-15)


def test_local_solve_pure_infinity_part_in_1d():
    # with two neighbors max + min = a + b, so alpha-only gives the same mean
    assert local_solve([0.2, 0.4], [0.2, 0.4], 0.0, 0.01,
                       NormalizedPLaplacian(1.0, 0.0, constant_field(G, 0.0))) \
        == pytest.approx(0.3, abs=1e-15)


def test_local_solve_shifts_by_the_source():
    h = 0.01
    got = local_solve([0.2, 0.4], [0.2, 0.4], 10.0, h,
                      NormalizedPLaplacian(0.0, 1.0, constant_field(G, 0.0)))
    assert got == pytest.approx(0.3 - 5.0 * h * h, abs=1e-15)


# ---------------------------------------------------------------- free solves

def test_free_solve_u_hat():
    rep = solve_visc_obstacle(problem(0.0, 1.0, "10", "1"), SchemeConfig(tol=1e-10))
    assert rep.converged
    assert np.abs(rep.solution.values - sample(G, "-5*x*(1-x)+1").values).max() <= 1e-8


def test_free_solve_linear_infinity_harmonic():
    rep = solve_visc_obstacle(problem(1.0, 0.0, "0", "x"), SchemeConfig(tol=1e-10))
    assert rep.converged
    assert np.abs(rep.solution.values - G.xs).max() <= 1e-8


def test_above_side_with_active_obstacle():
    u_hat = sample(G, "-5*x*(1-x)+1")
    rep = solve_visc_obstacle(problem(0.0, 1.0, "-2", "0", side=ABOVE, obstacle=u_hat),
                              SchemeConfig(tol=1e-9))
    assert rep.converged
    assert rep.solution.values[G.n_per_axis // 2] == pytest.approx(-0.25, abs=1e-6)
    assert (rep.solution.values <= u_hat.values + 1e-12).all()


def test_below_side_with_active_obstacle():
    tent = sample(G, "0.1 - abs(x - 0.5)")
    rep = solve_visc_obstacle(problem(0.0, 1.0, "0", "0", obstacle=tent),
                              SchemeConfig(tol=1e-10))
    assert rep.converged
    assert np.abs(rep.solution.values - sample(G, "0.2*min(x, 1-x)").values).max() <= 1e-8


def test_mixed_alpha_beta_2d_converges_to_a_solution():
    g2 = build_grid(2, 31)
    spec = NormalizedPLaplacian(1.0, 1.0, constant_field(g2, 0.0))
    prob = ObstacleProblem(spec=spec, side=BELOW,
                           obstacle=absent_obstacle(g2, BELOW),
                           boundary=sample(g2, "abs(x - 0.5) + abs(y - 0.5)"))
    rep = solve_visc_obstacle(prob, SchemeConfig(tol=1e-9))
    assert rep.converged
    assert classify(rep.solution, spec, 1e-7).kind == "solution"


# ---------------------------------------------------------------- convergence behavior

def test_limit_classifies_as_supersolution_below():
    tent = sample(G, "0.1 - abs(x - 0.5)")
    prob = problem(0.0, 1.0, "0", "0", obstacle=tent)
    rep = solve_visc_obstacle(prob, SchemeConfig(tol=1e-9))
    c = classify(rep.solution, prob.spec, 1e-7)
    assert c.kind in ("supersolution", "solution")


def test_two_starts_agree():
    prob = problem(0.0, 1.0, "10", "1")
    tol = 1e-9
    a = solve_visc_obstacle(prob, SchemeConfig(tol=tol))
    b = solve_visc_obstacle(prob, SchemeConfig(tol=tol),
                            w0=constant_field(G, 1.0))
    assert a.converged and b.converged
    assert np.abs(a.solution.values - b.solution.values).max() <= 10 * tol


def test_sweeps_from_a_subsolution_are_nondecreasing():
    # monotone operator: starting below the solution, every Gauss-Seidel
    # sweep moves each node upward (up to roundoff)
    prob = problem(0.0, 1.0, "-2", "0")
    w = np.zeros(G.n_nodes)  # residual -2 everywhere: a strict subsolution
    obst = prob.obstacle.values
    src = prob.spec.source.values
    h2 = G.h * G.h
    for _ in range(30):
        before = w.copy()
        _kernels.visc_sweep_1d(w, obst, src, h2, 0.0, 1.0, 1.0, 1.0)  # +1: clamp from below
        assert (w - before >= -1e-12).all()


def test_max_iter_exhaustion_reports_not_converged():
    rep = solve_visc_obstacle(problem(0.0, 1.0, "10", "1"),
                              SchemeConfig(tol=1e-10, max_iter=5))
    assert not rep.converged


def test_solver_requires_normalized_spec():
    prob = ObstacleProblem(
        spec=Variational(p=2.0, source=constant_field(G, 0.0)),
        side=BELOW, obstacle=absent_obstacle(G, BELOW), boundary=constant_field(G, 0.0),
    )
    with pytest.raises(ValueError):
        solve_visc_obstacle(prob)


@pytest.mark.parametrize("kwargs", [
    {"tol": 0.0},
    {"tol": -1e-8},
    {"max_iter": 0},
    {"damping": 0.0},
    {"damping": 1.5},
])
def test_scheme_config_validation(kwargs):
    with pytest.raises(ValueError):
        SchemeConfig(**kwargs)


def test_damped_iteration_still_converges():
    rep = solve_visc_obstacle(problem(0.0, 1.0, "-2", "0"),
                              SchemeConfig(tol=1e-8, damping=0.5))
    assert rep.converged
    assert np.abs(rep.solution.values - sample(G, "x*(1-x)").values).max() <= 1e-6


# ---------------------------------------------------------------- comparison

def test_comparison_zero_below_free_solution():
    spec = NormalizedPLaplacian(0.0, 1.0, constant_field(G, -2.0))
    free = solve_visc_obstacle(problem(0.0, 1.0, "-2", "0"), SchemeConfig(tol=1e-10)).solution
    rep = comparison_check(constant_field(G, 0.0), free, spec)
    assert rep.passed
    assert rep.hypotheses_hold


def test_comparison_of_a_field_with_itself():
    spec = NormalizedPLaplacian(0.0, 1.0, constant_field(G, -2.0))
    v = sample(G, "x*(1-x)")
    rep = comparison_check(v, v, spec)
    assert rep.passed
    assert rep.worst_violation <= 0.0


def test_comparison_flags_an_interior_bump():
    spec = NormalizedPLaplacian(0.0, 1.0, constant_field(G, -2.0))
    free = sample(G, "x*(1-x)")
    bumped = free.values.copy()
    node = 77
    bumped[node] += 0.1
    rep = comparison_check(ScalarField(G, bumped), free, spec)
    assert not rep.passed
    assert rep.worst_node == node
    assert rep.worst_violation == pytest.approx(0.1, abs=1e-12)
    assert not rep.hypotheses_hold  # the bump breaks the subsolution property too
