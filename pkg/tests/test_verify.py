import numpy as np
import pytest

from twomembranes import (
    BELOW,
    AuditReport,
    MembraneConfig,
    NormalizedPLaplacian,
    ObstacleProblem,
    ScalarField,
    SolveReport,
    Variational,
    absent_obstacle,
    audit_complementarity,
    audit_cross_solver,
    audit_trace,
    build_grid,
    constant_field,
    grid_refinement_study,
    iterate,
    sample,
    solve_obstacle,
)
from twomembranes import INCREASING_FROM_SUB

G = build_grid(1, 101)
PI = 3.14159265358979312


def tent_problem(grid=G):
    return ObstacleProblem(
        spec=Variational(2.0, constant_field(grid, 0.0)),
        side=BELOW,
        obstacle=sample(grid, "0.1 - abs(x - 0.5)"),
        boundary=constant_field(grid, 0.0),
    )


def golden_config(**kw):
    base = dict(
        spec1=Variational(2.0, constant_field(G, 10.0)),
        spec2=Variational(2.0, constant_field(G, -2.0)),
        boundary_f=constant_field(G, 1.0),
        boundary_g=constant_field(G, 0.0),
        seed=constant_field(G, 0.0),
        mode=INCREASING_FROM_SUB,
        tol=1e-8,
    )
    base.update(kw)
    return MembraneConfig(**base)


# ------------------------------------------------------ complementarity audit

def test_converged_tent_report_passes():
    prob = tent_problem()
    report = solve_obstacle(prob, tol=1e-9)
    audit = audit_complementarity(report, prob, tol=1e-6)
    assert audit.passed
    assert audit.tolerance == 1e-6


def test_audit_requires_convergence():
    prob = tent_problem()
    report = solve_obstacle(prob, tol=1e-10, max_iter=2)
    with pytest.raises(ValueError):
        audit_complementarity(report, prob)


def test_hand_built_violation_is_caught_at_its_node():
    prob = tent_problem()
    good = solve_obstacle(prob, tol=1e-9)
    bad_vals = good.solution.values.copy()
    node = 50  # push below the obstacle at the contact point
    bad_vals[node] = prob.obstacle.values[node] - 0.05
    forged = SolveReport(solution=ScalarField(G, bad_vals), iterations=1,
                         final_residual=0.0, contact_set=np.array([], dtype=int),
                         converged=True)
    audit = audit_complementarity(forged, prob, tol=1e-6)
    assert not audit.passed
    assert audit.worst_node == node


def test_free_solve_defect_is_tiny():
    prob = ObstacleProblem(
        spec=Variational(2.0, constant_field(G, 10.0)),
        side=BELOW, obstacle=absent_obstacle(G, BELOW), boundary=constant_field(G, 1.0),
    )
    report = solve_obstacle(prob, tol=1e-10)
    audit = audit_complementarity(report, prob, tol=1e-10)
    assert audit.passed
    assert audit.worst_value <= 1e-10


# --------------------------------------------------------------- trace audits

def test_clean_trace_passes_all_three():
    cfg = golden_config()
    trace = iterate(cfg)
    audits = audit_trace(trace, cfg.boundary_f, cfg.boundary_g)
    assert [a.name for a in audits] == [
        "trace_monotonicity", "trace_ordering", "trace_boundary_pinning"]
    assert all(a.passed for a in audits)


def test_swapped_steps_fail_monotonicity():
    cfg = golden_config()
    trace = iterate(cfg)
    trace.steps[0], trace.steps[-1] = trace.steps[-1], trace.steps[0]
    audits = {a.name: a for a in audit_trace(trace, cfg.boundary_f, cfg.boundary_g)}
    assert not audits["trace_monotonicity"].passed
    assert audits["trace_monotonicity"].worst_value > 1e-8


def test_single_step_trace_is_vacuous_on_deltas():
    cfg = golden_config()
    trace = iterate(cfg)
    trace.steps[:] = trace.steps[:1]
    audits = {a.name: a for a in audit_trace(trace, cfg.boundary_f, cfg.boundary_g)}
    assert audits["trace_monotonicity"].passed
    assert "vacuous" in audits["trace_monotonicity"].note
    assert audits["trace_ordering"].passed  # still evaluated on the one step


def test_ordering_violation_is_reported():
    cfg = golden_config()
    trace = iterate(cfg)
    # lift v above u at one interior node of the final step
    v_bad = trace.steps[-1].v.values.copy()
    v_bad[50] = trace.steps[-1].u.values[50] + 0.3
    trace.steps[-1].v = ScalarField(G, v_bad)
    audits = {a.name: a for a in audit_trace(trace, cfg.boundary_f, cfg.boundary_g)}
    assert not audits["trace_ordering"].passed
    assert audits["trace_ordering"].worst_node == 50


def test_boundary_pinning_detects_drift():
    cfg = golden_config()
    trace = iterate(cfg)
    u_bad = trace.steps[-1].u.values.copy()
    u_bad[0] += 1e-3
    trace.steps[-1].u = ScalarField(G, u_bad)
    audits = {a.name: a for a in audit_trace(trace, cfg.boundary_f, cfg.boundary_g)}
    assert not audits["trace_boundary_pinning"].passed
    assert audits["trace_boundary_pinning"].worst_node == 0


# --------------------------------------------------------------- cross-solver

def test_cross_solver_on_tent():
    audit = audit_cross_solver(tent_problem(), tol=1e-6, solver_tol=1e-9)
    assert audit.passed


def test_cross_solver_on_free_problem_is_tight():
    prob = ObstacleProblem(
        spec=Variational(2.0, constant_field(G, 10.0)),
        side=BELOW, obstacle=absent_obstacle(G, BELOW), boundary=constant_field(G, 1.0),
    )
    audit = audit_cross_solver(prob, tol=1e-6, solver_tol=1e-10)
    assert audit.passed
    assert audit.worst_value <= 1e-8


def test_cross_solver_rejects_non_p2():
    prob = ObstacleProblem(
        spec=NormalizedPLaplacian(1.0, 0.0, constant_field(G, 0.0)),
        side=BELOW, obstacle=absent_obstacle(G, BELOW), boundary=constant_field(G, 0.0),
    )
    with pytest.raises(ValueError):
        audit_cross_solver(prob)
    prob3 = ObstacleProblem(
        spec=Variational(3.0, constant_field(G, 0.0)),
        side=BELOW, obstacle=absent_obstacle(G, BELOW), boundary=constant_field(G, 0.0),
    )
    with pytest.raises(ValueError):
        audit_cross_solver(prob3)


def test_cross_solver_inconclusive_when_backends_stall():
    audit = audit_cross_solver(tent_problem(), tol=1e-6, solver_tol=1e-14)
    assert not audit.passed
    assert "inconclusive" in audit.note


# ---------------------------------------------------------------- refinement

def build_for(source, boundary):
    def build(n):
        g = build_grid(1, n)
        return ObstacleProblem(
            spec=Variational(2.0, sample(g, source)),
            side=BELOW, obstacle=absent_obstacle(g, BELOW), boundary=sample(g, boundary),
        )
    return build


def test_quadratic_reference_is_exact_at_all_resolutions():
    study = grid_refinement_study(build_for("10", "-5*x*(1-x)+1"),
                                  "-5*x*(1-x)+1", [51, 101, 201], tol=1e-10)
    assert all(row.sup_error <= 1e-9 for row in study.rows)


def test_manufactured_sine_ratio_is_second_order():
    src = f"-({PI}^2)*sin({PI}*x)"
    study = grid_refinement_study(build_for(src, "0"), f"sin({PI}*x)",
                                  [101, 201], tol=1e-10)
    ratio = study.ratios()[0]
    assert 3.5 <= ratio <= 4.5


def test_linear_reference_is_exact_for_any_p():
    def build(n):
        g = build_grid(1, n)
        return ObstacleProblem(
            spec=Variational(3.0, constant_field(g, 0.0)),
            side=BELOW, obstacle=absent_obstacle(g, BELOW), boundary=sample(g, "x"),
        )
    study = grid_refinement_study(build, "x", [51, 101], method="projected_gradient")
    assert all(row.sup_error <= 1e-10 for row in study.rows)


def test_refinement_csv_rows():
    study = grid_refinement_study(build_for("10", "-5*x*(1-x)+1"),
                                  "-5*x*(1-x)+1", [51, 101], tol=1e-11)
    rows = list(study.csv_rows())
    assert rows[0] == "n,h,sup_error,ratio"
    assert rows[1].split(",")[0] == "51"
    assert rows[1].split(",")[3] == ""  # first row has no ratio
    assert rows[2].split(",")[3] != ""


def test_nonconverging_study_raises():
    with pytest.raises(RuntimeError):
        grid_refinement_study(build_for("10", "-5*x*(1-x)+1"),
                              "-5*x*(1-x)+1", [201], tol=1e-14)


# --------------------------------------------------------------- audit shape

def test_reports_are_plain_data():
    a = AuditReport(name="x", passed=True, worst_value=0.0, worst_node=-1, tolerance=1e-6)
    assert a.to_json() == {
        "name": "x", "passed": True, "worst_value": 0.0,
        "worst_node": -1, "tolerance": 1e-6, "note": "",
    }


def test_audits_are_deterministic():
    prob = tent_problem()
    a = audit_cross_solver(prob, tol=1e-6, solver_tol=1e-9)
    b = audit_cross_solver(prob, tol=1e-6, solver_tol=1e-9)
    assert a == b
