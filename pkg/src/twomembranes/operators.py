"""Discrete operators: p-Dirichlet energies and normalized p-Laplacians.

Two operator families share the sign convention L w = -(diffusion) + h,
so supersolutions have nonnegative residual and subsolutions nonpositive:

* ``Variational(p, source)`` is the p-Laplacian in energy form. The
  discrete energy uses forward-difference gradients per cell (per interval
  in 1D, the two forward differences per square cell in 2D) and trapezoid
  node volumes for the source term:

      E_p(w) = sum_cells (1/p) |grad_h w|^p vol_cell + sum_nodes h_i w_i vol_i

  For p < 2 the degenerate weight |g|^(p-2) is regularized through
  |g|^2 -> |g|^2 + EPS_REG^2 consistently in the energy and its gradient,
  so energy_gradient stays the exact derivative of energy.

* ``NormalizedPLaplacian(alpha, beta, source)`` is the game-theoretic form
  L w = -beta lap_h w - alpha lap_inf_h w + h, with lap_h the 3/5-point
  Laplacian and lap_inf_h the monotone min-max stencil
  (max_N w + min_N w - 2 w_i) / h^2 over the axis-and-diagonal neighbors.

Residual fields are defined at interior nodes and are zero on the
boundary by convention. For p = 2 and (alpha, beta) = (0, 1) the two
residuals are computed from one shared second-difference kernel and agree
to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, ScalarField, check_same_grid

# Regularization floor for the p < 2 gradient weight.
EPS_REG = 1.0e-8

SOLUTION = "solution"
SUPERSOLUTION = "supersolution"
SUBSOLUTION = "subsolution"
NEITHER = "neither"


@dataclass(frozen=True)
class Variational:
    """p-Laplacian with zero-order source, in energy form."""

    p: float
    source: ScalarField

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"variational exponent must satisfy p > 1, got {self.p}")

    def with_negated_source(self) -> "Variational":
        return replace(self, source=ScalarField(self.source.grid, -self.source.values))


@dataclass(frozen=True)
class NormalizedPLaplacian:
    """Combination -beta lap - alpha lap_inf + source."""

    alpha: float
    beta: float
    source: ScalarField

    def __post_init__(self):
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")
        if not self.alpha + self.beta > 0.0:
            raise ValueError("need alpha + beta > 0")

    def with_negated_source(self) -> "NormalizedPLaplacian":
        return replace(self, source=ScalarField(self.source.grid, -self.source.values))


OperatorSpec = Variational | NormalizedPLaplacian

# Residual fields reuse the scalar container; boundary entries are 0.
ResidualField = ScalarField


def node_volumes(grid: Grid) -> np.ndarray:
    """Trapezoid-consistent node volumes (flat, node order)."""
    n = grid.n_per_axis
    w1 = np.full(n, grid.h)
    w1[0] = w1[-1] = grid.h / 2.0
    if grid.dim == 1:
        return w1
    return np.outer(w1, w1).reshape(-1)


def _grad_squared(w: np.ndarray, grid: Grid, p: float):
    """Per-cell squared gradient (plus eps^2 when p < 2) and raw differences."""
    h = grid.h
    if grid.dim == 1:
        d = np.diff(w)
        g = d / h
        s2 = g * g
        comps = (g,)
    else:
        n = grid.n_per_axis
        W = w.reshape(n, n)
        gx = (W[1:, :-1] - W[:-1, :-1]) / h
        gy = (W[:-1, 1:] - W[:-1, :-1]) / h
        s2 = gx * gx + gy * gy
        comps = (gx, gy)
    if p < 2.0:
        s2 = s2 + EPS_REG * EPS_REG
    return s2, comps


def energy(w: ScalarField, spec: Variational) -> float:
    """Discrete p-Dirichlet energy plus source term."""
    if not isinstance(spec, Variational):
        raise ValueError("energy is defined for variational specs only")
    grid = check_same_grid(w, spec.source)
    p = spec.p
    s2, _ = _grad_squared(w.values, grid, p)
    cellvol = grid.h ** grid.dim
    density = s2 ** (p / 2.0)
    if p < 2.0:
        density = density - EPS_REG ** p  # normalize so constant fields carry zero energy
    grad_term = (cellvol / p) * float(np.sum(density))
    src_term = float(np.sum(spec.source.values * w.values * node_volumes(grid)))
    return grad_term + src_term


def _lap_core_1d(w: np.ndarray) -> np.ndarray:
    # (forward difference) - (backward difference); unscaled second difference
    c = w[1:-1]
    return (w[2:] - c) - (c - w[:-2])


def _lap_core_2d(W: np.ndarray) -> np.ndarray:
    c = W[1:-1, 1:-1]
    return ((W[2:, 1:-1] - c) - (c - W[:-2, 1:-1])) + (
        (W[1:-1, 2:] - c) - (c - W[1:-1, :-2])
    )


def _variational_residual_interior(w: np.ndarray, grid: Grid, spec: Variational):
    h = grid.h
    src = spec.source.values
    p = spec.p
    if grid.dim == 1:
        if p == 2.0:
            return -_lap_core_1d(w) / (h * h) + src[1:-1]
        s2, (g,) = _grad_squared(w, grid, p)
        flux = s2 ** ((p - 2.0) / 2.0) * g
        return (flux[:-1] - flux[1:]) / h + src[1:-1]
    n = grid.n_per_axis
    W = w.reshape(n, n)
    if p == 2.0:
        core = -_lap_core_2d(W) / (h * h) + src.reshape(n, n)[1:-1, 1:-1]
        return core.reshape(-1)
    s2, (gx, gy) = _grad_squared(w, grid, p)
    weight = s2 ** ((p - 2.0) / 2.0)
    fx = weight * gx
    fy = weight * gy
    core = (fx[:-1, 1:] - fx[1:, 1:] + fy[1:, :-1] - fy[1:, 1:]) / h
    core = core + src.reshape(n, n)[1:-1, 1:-1]
    return core.reshape(-1)


def residual_variational(w: ScalarField, spec: Variational) -> ResidualField:
    """Pointwise residual of L_p w = -lap_p w + h; zero at boundary nodes."""
    if not isinstance(spec, Variational):
        raise ValueError("residual_variational needs a variational spec")
    grid = check_same_grid(w, spec.source)
    out = np.zeros(grid.n_nodes)
    interior = _variational_residual_interior(w.values, grid, spec)
    if grid.dim == 1:
        out[1:-1] = interior
    else:
        n = grid.n_per_axis
        out.reshape(n, n)[1:-1, 1:-1] = interior.reshape(n - 2, n - 2)
    return ScalarField(grid, out)


def energy_gradient(w: ScalarField, spec: Variational) -> ScalarField:
    """Partial derivatives of energy() w.r.t. interior node values; 0 on boundary."""
    res = residual_variational(w, spec)
    vals = res.values * node_volumes(res.grid)
    vals[res.grid.boundary_mask] = 0.0
    return ScalarField(res.grid, vals)


def _viscosity_residual_interior(w: np.ndarray, grid: Grid, spec: NormalizedPLaplacian):
    h2 = grid.h * grid.h
    src = spec.source.values
    if grid.dim == 1:
        lap = _lap_core_1d(w) / h2
        nbr_max = np.maximum(w[2:], w[:-2])
        nbr_min = np.minimum(w[2:], w[:-2])
        infl = ((nbr_max - w[1:-1]) + (nbr_min - w[1:-1])) / h2
        return -(spec.beta * lap) - (spec.alpha * infl) + src[1:-1]
    n = grid.n_per_axis
    W = w.reshape(n, n)
    lap = _lap_core_2d(W) / h2
    c = W[1:-1, 1:-1]
    stack = np.stack([
        W[2:, 1:-1], W[:-2, 1:-1], W[1:-1, 2:], W[1:-1, :-2],
        W[2:, 2:], W[2:, :-2], W[:-2, 2:], W[:-2, :-2],
    ])
    nbr_max = stack.max(axis=0)
    nbr_min = stack.min(axis=0)
    infl = ((nbr_max - c) + (nbr_min - c)) / h2
    core = -(spec.beta * lap) - (spec.alpha * infl) + src.reshape(n, n)[1:-1, 1:-1]
    return core.reshape(-1)


def residual_viscosity(w: ScalarField, spec: NormalizedPLaplacian) -> ResidualField:
    """Residual of -beta lap_h w - alpha lap_inf_h w + h; zero at boundary nodes."""
    if not isinstance(spec, NormalizedPLaplacian):
        raise ValueError("residual_viscosity needs a normalized p-Laplacian spec")
    grid = check_same_grid(w, spec.source)
    out = np.zeros(grid.n_nodes)
    interior = _viscosity_residual_interior(w.values, grid, spec)
    if grid.dim == 1:
        out[1:-1] = interior
    else:
        n = grid.n_per_axis
        out.reshape(n, n)[1:-1, 1:-1] = interior.reshape(n - 2, n - 2)
    return ScalarField(grid, out)


def residual(w: ScalarField, spec: OperatorSpec) -> ResidualField:
    if isinstance(spec, Variational):
        return residual_variational(w, spec)
    return residual_viscosity(w, spec)


@dataclass(frozen=True)
class Classification:
    kind: str
    min_residual: float
    argmin_node: int
    max_residual: float
    argmax_node: int
    tol: float

    def is_supersolution(self) -> bool:
        return self.kind in (SOLUTION, SUPERSOLUTION)

    def is_subsolution(self) -> bool:
        return self.kind in (SOLUTION, SUBSOLUTION)


def classify(w: ScalarField, spec: OperatorSpec, tol: float) -> Classification:
    """Classify a field by the sign pattern of its interior residual."""
    res = residual(w, spec)
    interior_idx = np.where(res.grid.interior_mask)[0]
    vals = res.values[interior_idx]
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    lo, hi = float(vals[i_min]), float(vals[i_max])
    if max(abs(lo), abs(hi)) <= tol:
        kind = SOLUTION
    elif lo >= -tol:
        kind = SUPERSOLUTION
    elif hi <= tol:
        kind = SUBSOLUTION
    else:
        kind = NEITHER
    return Classification(
        kind=kind,
        min_residual=lo,
        argmin_node=int(interior_idx[i_min]),
        max_residual=hi,
        argmax_node=int(interior_idx[i_max]),
        tol=tol,
    )
