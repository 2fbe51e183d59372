"""Audits that re-derive solver guarantees from raw fields.

Every audit recomputes its quantity from the solution or trace it is
handed (never trusting stored residual numbers) and reports the worst
violation, its node, and the tolerance it was judged against. Thresholds
always arrive as arguments so callers (CLI config, tests) own them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import ScalarField, sample
from .membranes import IterationTrace
from .operators import NormalizedPLaplacian, Variational
from .variational_obstacle import (
    ObstacleProblem,
    SolveReport,
    complementarity_defect,
    solve_obstacle,
)
from .viscosity_obstacle import SchemeConfig, solve_visc_obstacle


@dataclass
class AuditReport:
    name: str
    passed: bool
    worst_value: float
    worst_node: int
    tolerance: float
    note: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_value": float(self.worst_value),
            "worst_node": int(self.worst_node),
            "tolerance": float(self.tolerance),
            "note": self.note,
        }


def audit_complementarity(report: SolveReport, problem: ObstacleProblem,
                          tol: float = 1.0e-6) -> AuditReport:
    """Recompute the complementarity defect of a converged solve."""
    if not report.converged:
        raise ValueError("audit_complementarity expects a converged report")
    d = complementarity_defect(problem, report.solution)
    return AuditReport(
        name="complementarity",
        passed=bool(d.sup <= tol),
        worst_value=d.sup,
        worst_node=d.node,
        tolerance=tol,
    )


def audit_trace(trace: IterationTrace, f: ScalarField, g: ScalarField,
                monotonicity_tol: float = 1.0e-8,
                ordering_tol: float = 1.0e-8,
                boundary_tol: float = 0.0) -> list[AuditReport]:
    """Monotone progress, membrane ordering, and boundary pinning of a trace.

    All three quantities are recomputed from the stored fields so that a
    tampered or corrupted trace (e.g. steps out of order) is caught even
    when its recorded summary columns look clean.
    """
    reports = []
    sign = 1.0 if trace.mode == "increasing_from_sub" else -1.0

    worst = 0.0
    worst_node = -1
    for prev, cur in zip(trace.steps, trace.steps[1:]):
        for a, b_ in ((prev.u, cur.u), (prev.v, cur.v)):
            drift = sign * (b_.values - a.values)  # < 0 where a node moved backwards
            k = int(np.argmin(drift))
            if -drift[k] > worst:
                worst = float(-drift[k])
                worst_node = k
    if len(trace.steps) > 1:
        reports.append(AuditReport(
            name="trace_monotonicity",
            passed=bool(worst <= monotonicity_tol),
            worst_value=worst,
            worst_node=worst_node,
            tolerance=monotonicity_tol,
        ))
    else:
        reports.append(AuditReport(
            name="trace_monotonicity", passed=True, worst_value=0.0, worst_node=-1,
            tolerance=monotonicity_tol, note="vacuous: single-step trace",
        ))

    gap_viol = 0.0
    gap_node = -1
    for s in trace.steps:
        gap = s.u.values - s.v.values
        k = int(np.argmin(gap))
        if -gap[k] > gap_viol:
            gap_viol = float(-gap[k])
            gap_node = k
    reports.append(AuditReport(
        name="trace_ordering",
        passed=bool(gap_viol <= ordering_tol),
        worst_value=gap_viol,
        worst_node=gap_node,
        tolerance=ordering_tol,
    ))

    b = f.grid.boundary_mask
    worst_pin = 0.0
    worst_node = -1
    for s in trace.steps:
        for w, data in ((s.u, f), (s.v, g)):
            err = np.abs(w.values[b] - data.values[b])
            k = int(np.argmax(err))
            if err[k] > worst_pin:
                worst_pin = float(err[k])
                worst_node = int(np.where(b)[0][k])
    reports.append(AuditReport(
        name="trace_boundary_pinning",
        passed=bool(worst_pin <= boundary_tol),
        worst_value=worst_pin,
        worst_node=worst_node,
        tolerance=boundary_tol,
    ))
    return reports


def audit_cross_solver(problem: ObstacleProblem, tol: float = 1.0e-6,
                       solver_tol: float = 1.0e-8, omega: float = 1.5) -> AuditReport:
    """Solve a p=2 problem by PSOR and by the monotone scheme; compare sup-norms."""
    if not isinstance(problem.spec, Variational) or problem.spec.p != 2.0:
        raise ValueError("cross-solver audit is defined for variational p = 2 problems")
    rep_v = solve_obstacle(problem, method="psor", tol=solver_tol, omega=omega)
    visc_spec = NormalizedPLaplacian(alpha=0.0, beta=1.0, source=problem.spec.source)
    visc_problem = ObstacleProblem(
        spec=visc_spec, side=problem.side, obstacle=problem.obstacle, boundary=problem.boundary
    )
    rep_n = solve_visc_obstacle(visc_problem, SchemeConfig(tol=solver_tol))
    if not (rep_v.converged and rep_n.converged):
        lagging = "psor" if not rep_v.converged else "monotone scheme"
        return AuditReport(
            name="cross_solver", passed=False, worst_value=-1.0, worst_node=-1,
            tolerance=tol, note=f"inconclusive: {lagging} backend did not converge",
        )
    diff = np.abs(rep_v.solution.values - rep_n.solution.values)
    k = int(np.argmax(diff))
    return AuditReport(
        name="cross_solver",
        passed=bool(diff[k] <= tol),
        worst_value=float(diff[k]),
        worst_node=k,
        tolerance=tol,
    )


@dataclass
class RefinementRow:
    n: int
    h: float
    sup_error: float


@dataclass
class RefinementStudy:
    rows: list[RefinementRow] = field(default_factory=list)

    def ratios(self) -> list[float]:
        return [
            self.rows[i].sup_error / self.rows[i + 1].sup_error
            for i in range(len(self.rows) - 1)
        ]

    def csv_rows(self):
        yield "n,h,sup_error,ratio"
        prev = None
        for r in self.rows:
            ratio = "" if prev is None else f"{prev / r.sup_error:.17g}"
            yield f"{r.n},{r.h:.17g},{r.sup_error:.17g},{ratio}"
            prev = r.sup_error


def grid_refinement_study(build_problem: Callable[[int], ObstacleProblem],
                          reference, ns: Sequence[int],
                          method: str = "psor", tol: float = 1.0e-10,
                          omega: float = 1.5, damping: float = 1.0) -> RefinementStudy:
    """Sup-norm errors against a closed-form reference across resolutions.

    build_problem(n) must produce the same continuum problem discretized on
    n nodes per axis; reference is an expression or callable sampled on
    each grid.
    """
    study = RefinementStudy()
    for n in ns:
        problem = build_problem(int(n))
        if isinstance(problem.spec, Variational):
            rep = solve_obstacle(problem, method=method, tol=tol, omega=omega)
        else:
            rep = solve_visc_obstacle(problem, SchemeConfig(tol=tol, damping=damping))
        if not rep.converged:
            raise RuntimeError(f"refinement solve at n={n} did not converge")
        exact = sample(problem.grid, reference)
        err = float(np.max(np.abs(rep.solution.values - exact.values)))
        study.rows.append(RefinementRow(n=int(n), h=problem.grid.h, sup_error=err))
    return study
