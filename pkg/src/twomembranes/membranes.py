"""Monotone iteration between two coupled obstacle problems.

The two-membranes system asks for a pair (u, v), u above v, with

    min{ L1 u, u - v } = 0,   max{ L2 v, v - u } = 0,
    u = f, v = g on the boundary, f >= g there.

Each half is a one-sided obstacle problem in which the other membrane is
the obstacle, and the pair is attacked by alternating solves:

* IncreasingFromSub seeds v0 with a subsolution of L2 (v0 = g on the
  boundary), sets u0 = solve_below(L1, v0, f), then repeats
  v_n = solve_above(L2, u_{n-1}, g) followed by u_n = solve_below(L1, v_n, f).
  Both sequences are nodewise nondecreasing.
* DecreasingFromSuper seeds u0 with a supersolution of L1 (u0 = f on the
  boundary), sets v0 = solve_above(L2, u0, g), then repeats
  u_n = solve_below(L1, v_{n-1}, f) followed by v_n = solve_above(L2, u_n, g).
  Both sequences are nodewise nonincreasing.

Seeding with an exact solution of the corresponding operator converges
after a single outer step. Solutions of the system need not be unique;
nonuniqueness_demo() builds the quadratic example with two distinct pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DemoFailed, InfeasibleProblem, InnerSolveFailed, RejectedSeed
from .grid import Grid, ScalarField, absent_obstacle, build_grid, check_same_grid, constant_field
from .operators import (
    NormalizedPLaplacian,
    OperatorSpec,
    SOLUTION,
    SUBSOLUTION,
    SUPERSOLUTION,
    Variational,
    classify,
    energy,
    residual,
)
from .variational_obstacle import (
    ABOVE,
    BELOW,
    ObstacleProblem,
    solve_obstacle,
)
from .viscosity_obstacle import SchemeConfig, solve_visc_obstacle

INCREASING_FROM_SUB = "increasing_from_sub"
DECREASING_FROM_SUPER = "decreasing_from_super"


@dataclass
class MembraneConfig:
    """Inputs for the alternating iteration. spec1 drives the upper membrane."""

    spec1: OperatorSpec
    spec2: OperatorSpec
    boundary_f: ScalarField
    boundary_g: ScalarField
    seed: ScalarField
    mode: str
    tol: float = 1.0e-8
    max_outer: int = 200
    inner_tol: float | None = None
    inner_max_iter: int = 2_000_000
    omega: float = 1.5
    damping: float = 1.0
    seed_tol: float = 1.0e-9

    def __post_init__(self):
        if self.mode not in (INCREASING_FROM_SUB, DECREASING_FROM_SUPER):
            raise ValueError(f"unknown mode {self.mode!r}")
        check_same_grid(self.boundary_f, self.boundary_g, self.seed,
                        self.spec1.source, self.spec2.source)

    @property
    def grid(self) -> Grid:
        return self.seed.grid

    def effective_inner_tol(self) -> float:
        if self.inner_tol is not None:
            return self.inner_tol
        return max(self.tol * 1.0e-2, 1.0e-12)


@dataclass
class TwoMembraneReport:
    """Pointwise system residuals of a candidate pair."""

    sup_u: float      # sup |min(residual1, u - v)| over interior nodes
    sup_v: float      # sup |max(residual2, v - u)|
    worst_u_node: int
    worst_v_node: int
    signed_u: float
    signed_v: float
    boundary_u: float  # sup |u - f| on boundary nodes
    boundary_v: float

    def worst(self) -> float:
        return max(self.sup_u, self.sup_v, self.boundary_u, self.boundary_v)

    def passed(self, tol: float) -> bool:
        return self.worst() <= tol


def two_membrane_residual(u: ScalarField, v: ScalarField, spec1: OperatorSpec,
                          spec2: OperatorSpec, f: ScalarField, g: ScalarField) -> TwoMembraneReport:
    grid = check_same_grid(u, v, f, g)
    r1 = residual(u, spec1).values
    r2 = residual(v, spec2).values
    m1 = np.minimum(r1, u.values - v.values)
    m2 = np.maximum(r2, v.values - u.values)
    interior = np.where(grid.interior_mask)[0]
    k1 = int(np.argmax(np.abs(m1[interior])))
    k2 = int(np.argmax(np.abs(m2[interior])))
    b = grid.boundary_mask
    return TwoMembraneReport(
        sup_u=float(abs(m1[interior][k1])),
        sup_v=float(abs(m2[interior][k2])),
        worst_u_node=int(interior[k1]),
        worst_v_node=int(interior[k2]),
        signed_u=float(m1[interior][k1]),
        signed_v=float(m2[interior][k2]),
        boundary_u=float(np.max(np.abs(u.values[b] - f.values[b]))),
        boundary_v=float(np.max(np.abs(v.values[b] - g.values[b]))),
    )


@dataclass
class TraceStep:
    n: int
    u: ScalarField
    v: ScalarField
    min_gap: float
    res_u: float
    res_v: float
    sup_du: float | None = None
    sup_dv: float | None = None
    worst_monotonicity: float | None = None
    energy_u: float | None = None
    energy_v: float | None = None


@dataclass
class IterationTrace:
    mode: str
    steps: list[TraceStep] = field(default_factory=list)
    converged: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def outer_steps(self) -> int:
        return len(self.steps) - 1

    def final(self) -> TraceStep:
        return self.steps[-1]

    def csv_rows(self):
        """Rows for the trace CSV; None prints as an empty cell."""
        def fmt(x):
            return "" if x is None else f"{x:.17g}"
        yield "n,sup_du,sup_dv,min_gap,worst_monotonicity,res_u,res_v,energy_u,energy_v"
        for s in self.steps:
            yield ",".join([
                str(s.n), fmt(s.sup_du), fmt(s.sup_dv), fmt(s.min_gap),
                fmt(s.worst_monotonicity), fmt(s.res_u), fmt(s.res_v),
                fmt(s.energy_u), fmt(s.energy_v),
            ])

    def summary_json(self) -> dict:
        last = self.final()
        return {
            "mode": self.mode,
            "steps": self.outer_steps,
            "converged": bool(self.converged),
            "final_res_u": last.res_u,
            "final_res_v": last.res_v,
        }


def _solve_half(spec: OperatorSpec, side: str, obstacle: ScalarField,
                boundary: ScalarField, cfg: MembraneConfig, warm: ScalarField | None = None):
    problem = ObstacleProblem(spec=spec, side=side, obstacle=obstacle, boundary=boundary)
    tol = cfg.effective_inner_tol()
    if isinstance(spec, Variational):
        method = "psor" if spec.p == 2.0 else "projected_gradient"
        return solve_obstacle(problem, method=method, tol=tol,
                              max_iter=cfg.inner_max_iter, omega=cfg.omega, w0=warm)
    return solve_visc_obstacle(
        problem, SchemeConfig(tol=tol, max_iter=cfg.inner_max_iter, damping=cfg.damping), w0=warm
    )


def _check_seed(cfg: MembraneConfig) -> None:
    grid = cfg.grid
    if cfg.mode == INCREASING_FROM_SUB:
        spec, bnd, want = cfg.spec2, cfg.boundary_g, (SUBSOLUTION, SOLUTION)
        role = "subsolution of the lower operator"
    else:
        spec, bnd, want = cfg.spec1, cfg.boundary_f, (SUPERSOLUTION, SOLUTION)
        role = "supersolution of the upper operator"
    b = grid.boundary_mask
    mismatch = np.abs(cfg.seed.values[b] - bnd.values[b])
    if mismatch.size and mismatch.max() > cfg.seed_tol:
        where = np.where(b)[0][int(np.argmax(mismatch))]
        raise RejectedSeed(
            f"seed differs from its boundary data by {mismatch.max():.3g} at "
            f"{grid.describe_node(int(where))}"
        )
    cls = classify(cfg.seed, spec, cfg.seed_tol)
    if cls.kind not in want:
        # a rejected sub-seed violates on the positive side, a super-seed on the negative
        if cfg.mode == INCREASING_FROM_SUB:
            bad_node, bad_val = cls.argmax_node, cls.max_residual
        else:
            bad_node, bad_val = cls.argmin_node, cls.min_residual
        raise RejectedSeed(
            f"seed must be a {role}; classified {cls.kind} with residual "
            f"{bad_val:.3g} at {grid.describe_node(bad_node)}"
        )


def _exponent_warning(cfg: MembraneConfig) -> str | None:
    if not (isinstance(cfg.spec1, Variational) and isinstance(cfg.spec2, Variational)):
        return None
    p, q = cfg.spec1.p, cfg.spec2.p
    if cfg.mode == INCREASING_FROM_SUB and p < q:
        return f"increasing mode expects exponent ordering p >= q, got p={p} < q={q}"
    if cfg.mode == DECREASING_FROM_SUPER and p > q:
        return f"decreasing mode expects exponent ordering p <= q, got p={p} > q={q}"
    return None


def _make_step(cfg: MembraneConfig, n: int, u: ScalarField, v: ScalarField,
               prev: TraceStep | None) -> TraceStep:
    rep = two_membrane_residual(u, v, cfg.spec1, cfg.spec2, cfg.boundary_f, cfg.boundary_g)
    step = TraceStep(
        n=n, u=u, v=v,
        min_gap=float(np.min(u.values - v.values)),
        res_u=rep.sup_u, res_v=rep.sup_v,
    )
    if isinstance(cfg.spec1, Variational):
        step.energy_u = energy(u, cfg.spec1)
    if isinstance(cfg.spec2, Variational):
        step.energy_v = energy(v, cfg.spec2)
    if prev is not None:
        du = u.values - prev.u.values
        dv = v.values - prev.v.values
        step.sup_du = float(np.max(np.abs(du)))
        step.sup_dv = float(np.max(np.abs(dv)))
        if cfg.mode == INCREASING_FROM_SUB:
            step.worst_monotonicity = float(min(du.min(), dv.min()))
        else:
            step.worst_monotonicity = float(min((-du).min(), (-dv).min()))
    return step


def iterate(cfg: MembraneConfig) -> IterationTrace:
    """Run the alternating obstacle solves until both sup-deltas drop below tol."""
    grid = cfg.grid
    b = grid.boundary_mask
    if np.any(cfg.boundary_f.values[b] < cfg.boundary_g.values[b]):
        bad = np.where(b)[0][int(np.argmax(cfg.boundary_f.values[b] < cfg.boundary_g.values[b]))]
        raise InfeasibleProblem(
            f"boundary data must satisfy f >= g; violated at {grid.describe_node(int(bad))}"
        )
    _check_seed(cfg)
    trace = IterationTrace(mode=cfg.mode)
    warning = _exponent_warning(cfg)
    if warning:
        trace.warnings.append(warning)

    def solve_or_fail(spec, side, obstacle, boundary, step, which, warm=None):
        rep = _solve_half(spec, side, obstacle, boundary, cfg, warm)
        if not rep.converged:
            raise InnerSolveFailed(step, which, trace)
        return rep.solution

    if cfg.mode == INCREASING_FROM_SUB:
        v = cfg.seed
        u = solve_or_fail(cfg.spec1, BELOW, v, cfg.boundary_f, 0, "u")
        trace.steps.append(_make_step(cfg, 0, u, v, None))
        for n in range(1, cfg.max_outer + 1):
            v = solve_or_fail(cfg.spec2, ABOVE, u, cfg.boundary_g, n, "v", warm=v)
            u = solve_or_fail(cfg.spec1, BELOW, v, cfg.boundary_f, n, "u", warm=u)
            step = _make_step(cfg, n, u, v, trace.steps[-1])
            trace.steps.append(step)
            if step.sup_du <= cfg.tol and step.sup_dv <= cfg.tol:
                trace.converged = True
                break
    else:
        u = cfg.seed
        v = solve_or_fail(cfg.spec2, ABOVE, u, cfg.boundary_g, 0, "v")
        trace.steps.append(_make_step(cfg, 0, u, v, None))
        for n in range(1, cfg.max_outer + 1):
            u = solve_or_fail(cfg.spec1, BELOW, v, cfg.boundary_f, n, "u", warm=u)
            v = solve_or_fail(cfg.spec2, ABOVE, u, cfg.boundary_g, n, "v", warm=v)
            step = _make_step(cfg, n, u, v, trace.steps[-1])
            trace.steps.append(step)
            if step.sup_du <= cfg.tol and step.sup_dv <= cfg.tol:
                trace.converged = True
                break
    return trace


# Fixed configuration of the built-in nonuniqueness demonstration.
DEMO_N = 201
DEMO_H1 = 10.0
DEMO_H2 = -2.0
DEMO_TOL = 1.0e-6
_DEMO_INNER_TOL = 1.0e-10
_DEMO_SEPARATION = 0.5 - 1.0e-3


@dataclass
class DemoResult:
    grid: Grid
    u_hat: ScalarField
    v_hat: ScalarField
    u_tilde: ScalarField
    v_tilde: ScalarField
    report_hat: TwoMembraneReport
    report_tilde: TwoMembraneReport
    separation: float

    def summary_json(self) -> dict:
        return {
            "mode": "demo",
            "steps": 1,
            "converged": True,
            "final_res_u": max(self.report_hat.sup_u, self.report_tilde.sup_u),
            "final_res_v": max(self.report_hat.sup_v, self.report_tilde.sup_v),
            "sup_separation": self.separation,
        }


def nonuniqueness_demo() -> DemoResult:
    """Two distinct solution pairs of one quadratic two-membranes system.

    p = q = 2, sources h1 = 10 and h2 = -2, f = 1, g = 0 on (0,1) with
    n = 201. The hat pair starts from the free upper solution, the tilde
    pair from the free lower solution; they pass the system residual check
    at 1e-6 yet differ by about 1/2 in sup norm.
    """
    grid = build_grid(1, DEMO_N)
    f = constant_field(grid, 1.0)
    g = constant_field(grid, 0.0)
    spec1 = Variational(p=2.0, source=constant_field(grid, DEMO_H1))
    spec2 = Variational(p=2.0, source=constant_field(grid, DEMO_H2))

    def below(spec, obstacle, bnd):
        rep = solve_obstacle(
            ObstacleProblem(spec, BELOW, obstacle, bnd), method="psor", tol=_DEMO_INNER_TOL
        )
        if not rep.converged:
            raise DemoFailed("inner solve of the demo did not converge")
        return rep.solution

    def above(spec, obstacle, bnd):
        rep = solve_obstacle(
            ObstacleProblem(spec, ABOVE, obstacle, bnd), method="psor", tol=_DEMO_INNER_TOL
        )
        if not rep.converged:
            raise DemoFailed("inner solve of the demo did not converge")
        return rep.solution

    u_hat = below(spec1, absent_obstacle(grid, BELOW), f)
    v_hat = above(spec2, u_hat, g)
    v_tilde = above(spec2, absent_obstacle(grid, ABOVE), g)
    u_tilde = below(spec1, v_tilde, f)

    report_hat = two_membrane_residual(u_hat, v_hat, spec1, spec2, f, g)
    report_tilde = two_membrane_residual(u_tilde, v_tilde, spec1, spec2, f, g)
    separation = float(np.max(np.abs(u_hat.values - u_tilde.values)))

    if not report_hat.passed(DEMO_TOL):
        raise DemoFailed(f"hat pair fails the system residual check: {report_hat.worst():.3g}")
    if not report_tilde.passed(DEMO_TOL):
        raise DemoFailed(f"tilde pair fails the system residual check: {report_tilde.worst():.3g}")
    if separation < _DEMO_SEPARATION:
        raise DemoFailed(f"pairs are not separated: sup difference {separation:.6g}")
    return DemoResult(
        grid=grid,
        u_hat=u_hat, v_hat=v_hat, u_tilde=u_tilde, v_tilde=v_tilde,
        report_hat=report_hat, report_tilde=report_tilde,
        separation=separation,
    )
