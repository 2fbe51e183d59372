"""Monotone-scheme obstacle solver for the normalized p-Laplacian.

The scheme is the nodewise fixed point of local_solve: each Gauss-Seidel
visit replaces the node value by the unique scalar zeroing its residual
given the current neighbors, then clamps against the obstacle (up for
Below, down for Above). Because the residual is strictly increasing in
the node value and nonincreasing in every neighbor, sweeps started at a
clamped subsolution are nodewise nondecreasing and converge to the
smallest supersolution above the obstacle.

Stopping requires both the sup-norm of the sweep update to fall below tol
and the complementarity defect to reach tol, so a converged report also
classifies correctly at the same tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InfeasibleProblem  # noqa: F401  (re-raised through check_compatibility)
from .grid import ScalarField, check_same_grid
from .operators import NormalizedPLaplacian, OperatorSpec, classify
from .variational_obstacle import (
    ABOVE,
    BELOW,
    ObstacleProblem,
    SolveReport,
    check_compatibility,
    complementarity_defect,
    contact_nodes,
    initial_iterate,
)


@dataclass(frozen=True)
class SchemeConfig:
    tol: float = 1.0e-8
    max_iter: int = 2_000_000
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")


def local_solve(axis_neighbors, stencil_neighbors, source_value: float, h: float,
                spec: NormalizedPLaplacian) -> float:
    """Scalar solve at one node: the value zeroing the residual there.

    axis_neighbors feeds the beta-Laplacian sum (2 values in 1D, 4 in 2D);
    stencil_neighbors feeds the min-max pair (axis plus diagonals in 2D).
    The min-max pair does not involve the node value, so the one-node
    problem is linear:

        w = (beta * sum + alpha * (max + min) - h^2 src) / (2 d beta + 2 alpha)
    """
    axis = np.asarray(axis_neighbors, dtype=float)
    sten = np.asarray(stencil_neighbors, dtype=float)
    d = axis.size // 2
    denom = 2.0 * d * spec.beta + 2.0 * spec.alpha
    return float(
        (spec.beta * axis.sum() + spec.alpha * (sten.max() + sten.min()) - source_value * h * h)
        / denom
    )


def solve_visc_obstacle(
    problem: ObstacleProblem,
    cfg: SchemeConfig = SchemeConfig(),
    w0: ScalarField | None = None,
) -> SolveReport:
    """Projected Gauss-Seidel fixed point for either obstacle side."""
    if not isinstance(problem.spec, NormalizedPLaplacian):
        raise ValueError("solve_visc_obstacle needs a normalized p-Laplacian spec")
    check_compatibility(problem)
    g = problem.grid
    h2 = g.h * g.h
    side = 1 if problem.side == BELOW else -1
    vals = initial_iterate(problem, w0)
    if g.dim == 1:
        sweeps, worst, _, _, sup = _kernels.visc_solve_1d(
            vals, problem.obstacle.values, problem.spec.source.values, h2,
            problem.spec.alpha, problem.spec.beta, cfg.damping, side, cfg.tol, cfg.max_iter,
        )
    else:
        n = g.n_per_axis
        v2 = vals.reshape(n, n)
        sweeps, worst, _, _, sup = _kernels.visc_solve_2d(
            v2, problem.obstacle.values.reshape(n, n), problem.spec.source.values.reshape(n, n),
            h2, problem.spec.alpha, problem.spec.beta, cfg.damping, side, cfg.tol, cfg.max_iter,
        )
    sol = ScalarField(g, vals)
    converged = bool(worst <= cfg.tol and sup < cfg.tol)
    return SolveReport(
        solution=sol,
        iterations=int(sweeps),
        final_residual=float(worst),
        contact_set=contact_nodes(problem, sol, cfg.tol),
        converged=converged,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of the discrete comparison audit between two fields."""

    passed: bool
    worst_violation: float   # max of (w1 - w2); <= tol when ordered
    worst_node: int
    sub_kind: str            # classification of w1
    super_kind: str          # classification of w2
    boundary_ordered: bool
    hypotheses_hold: bool


def comparison_check(w1: ScalarField, w2: ScalarField, spec: OperatorSpec,
                     tol: float = 1.0e-9) -> ComparisonReport:
    """Check comparison: subsolution w1 under supersolution w2 stays below.

    The ordering w1 <= w2 + tol is evaluated regardless; the report also
    records whether the classification and boundary hypotheses held, so a
    failed ordering with failed hypotheses is not evidence against the
    scheme.
    """
    check_same_grid(w1, w2, spec.source)
    c1 = classify(w1, spec, tol)
    c2 = classify(w2, spec, tol)
    b = w1.grid.boundary_mask
    boundary_ordered = bool(np.all(w1.values[b] <= w2.values[b] + tol))
    diff = w1.values - w2.values
    k = int(np.argmax(diff))
    worst = float(diff[k])
    return ComparisonReport(
        passed=bool(worst <= tol),
        worst_violation=worst,
        worst_node=k,
        sub_kind=c1.kind,
        super_kind=c2.kind,
        boundary_ordered=boundary_ordered,
        hypotheses_hold=bool(c1.is_subsolution() and c2.is_supersolution() and boundary_ordered),
    )
