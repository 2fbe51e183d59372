"""Discrete obstacle problems for the variational operators.

Below-side problem: find the smallest supersolution above the obstacle,
    min{ L_p u, u - phi } = 0 in the interior,  u = f on the boundary,
equivalently the energy minimizer over { w >= phi, w = f on boundary }.
Above-side problems are always reduced to Below through dualize(), which
negates obstacle, boundary, and source and flips the side; negation is
exact in floating point, so dualize is a bit-for-bit involution.

Two solver backends:

* PSOR, p = 2 only: lexicographic projected SOR sweeps with relaxation
  factor omega in (0, 2), default 1.5.
* Projected gradient, any p > 1: backtracking Armijo line search along the
  projection arc (at most 60 halvings per step), Barzilai-Borwein trial
  step, monotone in energy. Initial iterate is the pointwise max of the
  obstacle and the linear interpolant of the boundary data.

Convergence is declared on the complementarity defect
    d_i = min(residual_i, u_i - phi_i)        (Below)
whose sup-norm over interior nodes must drop to tol. Contact nodes are
the interior nodes with |u - phi| <= gap_tol, gap_tol = max(1e-8, 10 tol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InfeasibleProblem
from .grid import Grid, ScalarField, check_same_grid
from .operators import (
    NormalizedPLaplacian,
    OperatorSpec,
    Variational,
    energy,
    energy_gradient,
    residual,
)

BELOW = "below"
ABOVE = "above"

MAX_HALVINGS = 60


def gap_tol(tol: float) -> float:
    return max(1.0e-8, 10.0 * tol)


@dataclass
class ObstacleProblem:
    """One-sided obstacle problem; boundary values read only on boundary nodes."""

    spec: OperatorSpec
    side: str
    obstacle: ScalarField
    boundary: ScalarField

    def __post_init__(self):
        if self.side not in (BELOW, ABOVE):
            raise ValueError(f"side must be '{BELOW}' or '{ABOVE}', got {self.side!r}")
        check_same_grid(self.obstacle, self.boundary, self.spec.source)

    @property
    def grid(self) -> Grid:
        return self.obstacle.grid


@dataclass
class SolveReport:
    solution: ScalarField
    iterations: int
    final_residual: float
    contact_set: np.ndarray
    converged: bool

    def to_json(self) -> dict:
        return {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "final_residual": float(self.final_residual),
            "contact_count": int(len(self.contact_set)),
        }


@dataclass(frozen=True)
class DefectReport:
    sup: float
    signed_worst: float
    node: int


def check_compatibility(problem: ObstacleProblem) -> None:
    """Boundary data must sit on the feasible side of the obstacle."""
    b = problem.grid.boundary_mask
    f = problem.boundary.values[b]
    phi = problem.obstacle.values[b]
    if problem.side == BELOW:
        bad = f < phi
    else:
        bad = f > phi
    if bad.any():
        where = np.where(b)[0][np.argmax(bad)]
        raise InfeasibleProblem(
            f"boundary value {problem.boundary.values[where]:.6g} on the wrong side of "
            f"obstacle {problem.obstacle.values[where]:.6g} at {problem.grid.describe_node(int(where))}"
        )


def dualize(problem: ObstacleProblem) -> ObstacleProblem:
    """Flip the side and negate obstacle, boundary, and operator source."""
    g = problem.grid
    return ObstacleProblem(
        spec=problem.spec.with_negated_source(),
        side=ABOVE if problem.side == BELOW else BELOW,
        obstacle=ScalarField(g, -problem.obstacle.values),
        boundary=ScalarField(g, -problem.boundary.values),
    )


def complementarity_defect(problem: ObstacleProblem, w: ScalarField) -> DefectReport:
    """Sup-norm of min(residual, gap) (Below) or max(residual, -gap) (Above)."""
    check_same_grid(w, problem.obstacle)
    res = residual(w, problem.spec).values
    diff = w.values - problem.obstacle.values
    if problem.side == BELOW:
        d = np.minimum(res, diff)
    else:
        d = np.maximum(res, diff)
    interior = np.where(w.grid.interior_mask)[0]
    vals = d[interior]
    k = int(np.argmax(np.abs(vals)))
    return DefectReport(sup=float(abs(vals[k])), signed_worst=float(vals[k]), node=int(interior[k]))


def boundary_interpolant(grid: Grid, boundary: ScalarField) -> np.ndarray:
    """Linear interpolation of the boundary data into the interior.

    1D: the chord between the endpoint values. 2D: the transfinite bilinear
    blend of the four edges (exact on the boundary).
    """
    f = boundary.values
    x = grid.xs
    if grid.dim == 1:
        return f[0] + (f[-1] - f[0]) * x
    n = grid.n_per_axis
    F = f.reshape(n, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    west, east = F[0, :], F[-1, :]      # x = 0 and x = 1 edges
    south, north = F[:, 0], F[:, -1]    # y = 0 and y = 1 edges
    blend = (
        (1 - X) * west[None, :]
        + X * east[None, :]
        + (1 - Y) * south[:, None]
        + Y * north[:, None]
        - (1 - X) * (1 - Y) * F[0, 0]
        - (1 - X) * Y * F[0, -1]
        - X * (1 - Y) * F[-1, 0]
        - X * Y * F[-1, -1]
    )
    return blend.reshape(-1)


def initial_iterate(problem: ObstacleProblem, w0: ScalarField | None = None) -> np.ndarray:
    """Feasible start: obstacle-projected boundary interpolant (or given field)."""
    base = boundary_interpolant(problem.grid, problem.boundary) if w0 is None else w0.values.copy()
    if problem.side == BELOW:
        vals = np.maximum(base, problem.obstacle.values)
    else:
        vals = np.minimum(base, problem.obstacle.values)
    vals[problem.grid.boundary_mask] = problem.boundary.values[problem.grid.boundary_mask]
    return vals


def contact_nodes(problem: ObstacleProblem, w: ScalarField, tol: float) -> np.ndarray:
    close = np.abs(w.values - problem.obstacle.values) <= gap_tol(tol)
    return np.where(close & w.grid.interior_mask)[0]


def psor_sweep(w: ScalarField, problem: ObstacleProblem, omega: float = 1.5) -> ScalarField:
    """One lexicographic projected SOR sweep (p = 2, Below side)."""
    if not isinstance(problem.spec, Variational) or problem.spec.p != 2.0:
        raise ValueError("psor_sweep requires a variational spec with p = 2")
    if problem.side != BELOW:
        raise ValueError("psor_sweep operates on Below-side problems")
    if not 0.0 < omega < 2.0:
        raise ValueError(f"relaxation factor must lie in (0, 2), got {omega}")
    g = w.grid
    h2 = g.h * g.h
    vals = w.values.copy()
    if g.dim == 1:
        _kernels.psor_sweep_1d(vals, problem.obstacle.values, problem.spec.source.values, h2, omega)
    else:
        n = g.n_per_axis
        v2 = vals.reshape(n, n)
        _kernels.psor_sweep_2d(
            v2,
            problem.obstacle.values.reshape(n, n),
            problem.spec.source.values.reshape(n, n),
            h2,
            omega,
        )
    return ScalarField(g, vals)


def _psor_solve(problem: ObstacleProblem, tol, max_iter, omega, w0):
    if problem.spec.p != 2.0:
        raise ValueError("PSOR backend requires p = 2; use projected_gradient")
    if not 0.0 < omega < 2.0:
        raise ValueError(f"relaxation factor must lie in (0, 2), got {omega}")
    g = problem.grid
    h2 = g.h * g.h
    vals = initial_iterate(problem, w0)
    if g.dim == 1:
        sweeps, worst, _, _ = _kernels.psor_solve_1d(
            vals, problem.obstacle.values, problem.spec.source.values, h2, omega, tol, max_iter
        )
    else:
        n = g.n_per_axis
        v2 = vals.reshape(n, n)
        sweeps, worst, _, _ = _kernels.psor_solve_2d(
            v2,
            problem.obstacle.values.reshape(n, n),
            problem.spec.source.values.reshape(n, n),
            h2,
            omega,
            tol,
            max_iter,
        )
    return ScalarField(g, vals), int(sweeps), float(worst)


def projected_gradient_solve(
    problem: ObstacleProblem,
    tol: float = 1.0e-8,
    max_iter: int = 50000,
    w0: ScalarField | None = None,
) -> SolveReport:
    """First-order solve of the Below-side problem for any p > 1.

    Steps follow the projection arc w(t) = max(w - t grad, phi) with a
    backtracking Armijo test. The test carries a small absolute slack:
    near the optimum the true decrease per step falls below the rounding
    noise of the energy sum, and without the slack the search would stall
    around defect 1e-6 instead of reaching solver tolerances. A step whose
    60 halvings all fail (beyond the slack) produces a stalled
    (non-converged) report.
    """
    if not isinstance(problem.spec, Variational):
        raise ValueError("projected gradient needs a variational spec")
    if problem.side != BELOW:
        raise ValueError("internal: projected_gradient_solve is Below-side only")
    check_compatibility(problem)
    g = problem.grid
    bmask = g.boundary_mask
    phi = problem.obstacle.values
    fvals = problem.boundary.values

    w = ScalarField(g, initial_iterate(problem, w0))
    E = energy(w, problem.spec)
    grad = energy_gradient(w, problem.spec).values
    t = 1.0
    iterations = 0
    stalled = False

    for _ in range(max_iter):
        defect = complementarity_defect(problem, w)
        if defect.sup <= tol:
            return SolveReport(
                solution=w,
                iterations=iterations,
                final_residual=defect.sup,
                contact_set=contact_nodes(problem, w, tol),
                converged=True,
            )
        accepted = False
        noise = 1.0e-14 * (1.0 + abs(E))  # rounding floor of the energy sum
        for _ in range(MAX_HALVINGS + 1):
            cand = np.maximum(w.values - t * grad, phi)
            cand[bmask] = fvals[bmask]
            s = cand - w.values
            if not s.any():
                break  # projection is pinned; no direction left at any step size
            cand_field = ScalarField(g, cand)
            E_cand = energy(cand_field, problem.spec)
            if E_cand <= E + 1.0e-4 * float(np.dot(grad, s)) + noise:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stalled = True
            break
        grad_new = energy_gradient(cand_field, problem.spec).values
        y = grad_new - grad
        sty = float(np.dot(s, y))
        sts = float(np.dot(s, s))
        t = min(max(sts / sty, 1.0e-10), 1.0e6) if sty > 0.0 else min(t * 2.0, 1.0e6)
        w, E, grad = cand_field, E_cand, grad_new
        iterations += 1

    defect = complementarity_defect(problem, w)
    return SolveReport(
        solution=w,
        iterations=iterations,
        final_residual=defect.sup,
        contact_set=contact_nodes(problem, w, tol),
        converged=bool(defect.sup <= tol) and not stalled,
    )


def solve_obstacle(
    problem: ObstacleProblem,
    method: str = "psor",
    tol: float = 1.0e-8,
    max_iter: int = 200000,
    omega: float = 1.5,
    w0: ScalarField | None = None,
) -> SolveReport:
    """Solve a one-sided obstacle problem with a variational spec.

    Above-side problems are dualized and solved from Below. Non-convergence
    within max_iter yields converged=False, never an exception.
    """
    if isinstance(problem.spec, NormalizedPLaplacian):
        raise ValueError("normalized p-Laplacian problems go to solve_visc_obstacle")
    if method not in ("psor", "projected_gradient"):
        raise ValueError(f"unknown method {method!r}")
    check_compatibility(problem)

    if problem.side == ABOVE:
        neg0 = ScalarField(problem.grid, -w0.values) if w0 is not None else None
        rep = solve_obstacle(dualize(problem), method=method, tol=tol, max_iter=max_iter, omega=omega, w0=neg0)
        return SolveReport(
            solution=ScalarField(problem.grid, -rep.solution.values),
            iterations=rep.iterations,
            final_residual=rep.final_residual,
            contact_set=rep.contact_set,
            converged=rep.converged,
        )

    if method == "projected_gradient":
        return projected_gradient_solve(problem, tol=tol, max_iter=max_iter, w0=w0)

    sol, sweeps, worst = _psor_solve(problem, tol, max_iter, omega, w0)
    return SolveReport(
        solution=sol,
        iterations=sweeps,
        final_residual=worst,
        contact_set=contact_nodes(problem, sol, tol),
        converged=bool(worst <= tol),
    )
