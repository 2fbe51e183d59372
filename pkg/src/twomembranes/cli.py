"""Config-file driven command line front end.

Subcommands: solve, iterate, demo, verify, refine. Configs are flat INI
sections of key=value pairs; unknown sections or keys are rejected. All
artifacts (field CSVs, trace CSVs, JSON reports) are byte-deterministic
for identical configs; timestamps appear only in log lines on stderr.

Exit codes: 0 success, 2 config or expression error, 3 infeasible problem
or rejected seed, 4 solver non-convergence (partial artifacts are still
written). The verify subcommand exits with the number of failed audits.

The MEMBRANE_LOG environment variable (quiet, info, debug) controls log
verbosity.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    ExpressionError,
    InfeasibleProblem,
    InnerSolveFailed,
    RejectedSeed,
    SamplingError,
)
from .expressions import parse_expression
from .grid import Grid, ScalarField, absent_obstacle, build_grid, dump_field_csv, sample
from .membranes import (
    DECREASING_FROM_SUPER,
    INCREASING_FROM_SUB,
    MembraneConfig,
    iterate,
    nonuniqueness_demo,
    two_membrane_residual,
)
from .operators import NormalizedPLaplacian, OperatorSpec, Variational
from .variational_obstacle import (
    ABOVE,
    BELOW,
    ObstacleProblem,
    complementarity_defect,
    solve_obstacle,
)
from .verify import AuditReport, audit_trace, grid_refinement_study
from .viscosity_obstacle import SchemeConfig, solve_visc_obstacle

log = logging.getLogger("twomembranes")

_SCHEMA: dict[str, set[str]] = {
    "grid": {"dim", "n"},
    "op1": {"kind", "p", "alpha", "beta", "source"},
    "op2": {"kind", "p", "alpha", "beta", "source"},
    "boundary": {"f", "g"},
    "obstacle": {"expr", "side"},
    "seed": {"expr", "mode"},
    "solver": {"method", "tol", "max_iter", "omega", "damping", "max_outer", "inner_tol"},
    "verify": {"monotonicity_tol", "ordering_tol", "boundary_tol",
               "complementarity_tol", "residual_tol"},
    "refine": {"ns", "reference"},
    "output": {"dir"},
}

_REQUIRED: dict[str, list[tuple[str, str]]] = {
    "solve": [("grid", "dim"), ("grid", "n"), ("op1", "kind"), ("boundary", "f")],
    "iterate": [("grid", "dim"), ("grid", "n"), ("op1", "kind"), ("op2", "kind"),
                ("boundary", "f"), ("boundary", "g"), ("seed", "expr"), ("seed", "mode")],
    "verify": [("grid", "dim"), ("grid", "n"), ("op1", "kind"), ("op2", "kind"),
               ("boundary", "f"), ("boundary", "g"), ("seed", "expr"), ("seed", "mode")],
    "refine": [("grid", "dim"), ("op1", "kind"), ("boundary", "f"),
               ("refine", "ns"), ("refine", "reference")],
    "demo": [],
}


@dataclass
class ExperimentConfig:
    """Validated key=value sections plus command line overrides."""

    sections: dict[str, dict[str, str]]
    n_override: int | None = None
    tol_override: float | None = None
    out_override: str | None = None

    def get(self, section: str, key: str, default: str | None = None) -> str | None:
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        val = self.get(section, key)
        if val is None:
            raise ConfigError(f"missing required key [{section}] {key}")
        return val


def parse_config_text(text: str, origin: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    sections: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SCHEMA[section]
        sections[section] = {}
        for key, value in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            sections[section][key] = value.strip()
    return ExperimentConfig(sections=sections)


def load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, origin=path)


def _as_int(cfg: ExperimentConfig, section: str, key: str, default: int | None = None) -> int:
    raw = cfg.get(section, key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key [{section}] {key}")
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from exc


def _as_float(cfg: ExperimentConfig, section: str, key: str, default: float | None = None) -> float:
    raw = cfg.get(section, key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key [{section}] {key}")
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from exc


def _build_grid(cfg: ExperimentConfig) -> Grid:
    dim = _as_int(cfg, "grid", "dim")
    n = cfg.n_override if cfg.n_override is not None else _as_int(cfg, "grid", "n")
    try:
        return build_grid(dim, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _field(grid: Grid, text: str, what: str) -> ScalarField:
    try:
        return sample(grid, text)
    except (ExpressionError, SamplingError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def _build_spec(cfg: ExperimentConfig, section: str, grid: Grid) -> OperatorSpec:
    kind = cfg.require(section, "kind")
    src = _field(grid, cfg.get(section, "source", "0"), f"[{section}] source")
    try:
        if kind == "variational":
            return Variational(p=_as_float(cfg, section, "p", 2.0), source=src)
        if kind == "normalized":
            return NormalizedPLaplacian(
                alpha=_as_float(cfg, section, "alpha", 0.0),
                beta=_as_float(cfg, section, "beta", 1.0),
                source=src,
            )
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc
    raise ConfigError(f"[{section}] kind must be 'variational' or 'normalized', got {kind!r}")


def _solver_tol(cfg: ExperimentConfig) -> float:
    if cfg.tol_override is not None:
        return cfg.tol_override
    return _as_float(cfg, "solver", "tol", 1.0e-8)


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = cfg.out_override or cfg.get("output", "dir", "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _build_obstacle_problem(cfg: ExperimentConfig, grid: Grid) -> ObstacleProblem:
    side = cfg.get("obstacle", "side", BELOW)
    if side not in (BELOW, ABOVE):
        raise ConfigError(f"[obstacle] side must be 'below' or 'above', got {side!r}")
    expr = cfg.get("obstacle", "expr", "none")
    obstacle = absent_obstacle(grid, side) if expr == "none" else _field(grid, expr, "[obstacle] expr")
    spec = _build_spec(cfg, "op1", grid)
    boundary = _field(grid, cfg.require("boundary", "f"), "[boundary] f")
    try:
        return ObstacleProblem(spec=spec, side=side, obstacle=obstacle, boundary=boundary)
    except ValueError as exc:
        if isinstance(exc, InfeasibleProblem):
            raise
        raise ConfigError(str(exc)) from exc


def run_solve(cfg: ExperimentConfig) -> int:
    grid = _build_grid(cfg)
    problem = _build_obstacle_problem(cfg, grid)
    tol = _solver_tol(cfg)
    method = cfg.get("solver", "method", "auto")
    max_iter = _as_int(cfg, "solver", "max_iter", 2_000_000)
    out = _out_dir(cfg)
    if isinstance(problem.spec, Variational):
        if method == "auto":
            method = "psor" if problem.spec.p == 2.0 else "projected_gradient"
        if method not in ("psor", "projected_gradient"):
            raise ConfigError(f"[solver] method must be auto, psor, or projected_gradient, got {method!r}")
        report = solve_obstacle(problem, method=method, tol=tol, max_iter=max_iter,
                                omega=_as_float(cfg, "solver", "omega", 1.5))
    else:
        scheme = SchemeConfig(tol=tol, max_iter=max_iter,
                              damping=_as_float(cfg, "solver", "damping", 1.0))
        report = solve_visc_obstacle(problem, scheme)
    dump_field_csv(report.solution, out / "solution.csv")
    _write_json(out / "report.json", report.to_json())
    log.info("solve: converged=%s iterations=%d final_residual=%.3g",
             report.converged, report.iterations, report.final_residual)
    print(f"solve converged={report.converged} iterations={report.iterations} "
          f"final_residual={report.final_residual:.6g} out={out}")
    return 0 if report.converged else 4


def _build_membrane_config(cfg: ExperimentConfig, grid: Grid) -> MembraneConfig:
    mode = cfg.require("seed", "mode")
    if mode not in (INCREASING_FROM_SUB, DECREASING_FROM_SUPER):
        raise ConfigError(
            f"[seed] mode must be {INCREASING_FROM_SUB} or {DECREASING_FROM_SUPER}, got {mode!r}"
        )
    inner_tol_raw = cfg.get("solver", "inner_tol")
    try:
        return MembraneConfig(
            spec1=_build_spec(cfg, "op1", grid),
            spec2=_build_spec(cfg, "op2", grid),
            boundary_f=_field(grid, cfg.require("boundary", "f"), "[boundary] f"),
            boundary_g=_field(grid, cfg.require("boundary", "g"), "[boundary] g"),
            seed=_field(grid, cfg.require("seed", "expr"), "[seed] expr"),
            mode=mode,
            tol=_solver_tol(cfg),
            max_outer=_as_int(cfg, "solver", "max_outer", 200),
            inner_tol=float(inner_tol_raw) if inner_tol_raw is not None else None,
            inner_max_iter=_as_int(cfg, "solver", "max_iter", 2_000_000),
            omega=_as_float(cfg, "solver", "omega", 1.5),
            damping=_as_float(cfg, "solver", "damping", 1.0),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (InfeasibleProblem, RejectedSeed)):
            raise
        raise ConfigError(str(exc)) from exc


def _dump_trace(trace, out: Path) -> None:
    (out / "trace.csv").write_text("\n".join(trace.csv_rows()) + "\n")
    _write_json(out / "summary.json", trace.summary_json())
    last = trace.final()
    dump_field_csv(last.u, out / "u_final.csv")
    dump_field_csv(last.v, out / "v_final.csv")


def run_iterate(cfg: ExperimentConfig) -> int:
    grid = _build_grid(cfg)
    mc = _build_membrane_config(cfg, grid)
    out = _out_dir(cfg)
    try:
        trace = iterate(mc)
    except InnerSolveFailed as exc:
        log.error("inner solve failed at outer step %d", exc.step)
        if exc.trace is not None and exc.trace.steps:
            _dump_trace(exc.trace, out)
        else:
            (out / "trace.csv").write_text(
                "n,sup_du,sup_dv,min_gap,worst_monotonicity,res_u,res_v,energy_u,energy_v\n")
            _write_json(out / "summary.json", {
                "mode": mc.mode, "steps": 0, "converged": False,
                "failed_inner_solve": exc.which, "failed_at_step": exc.step,
            })
        return 4
    for w in trace.warnings:
        log.warning("%s", w)
    _dump_trace(trace, out)
    print(f"iterate mode={trace.mode} steps={trace.outer_steps} converged={trace.converged} "
          f"res_u={trace.final().res_u:.6g} res_v={trace.final().res_v:.6g} out={out}")
    return 0 if trace.converged else 4


def run_demo(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    result = nonuniqueness_demo()
    dump_field_csv(result.u_hat, out / "u_hat.csv")
    dump_field_csv(result.v_hat, out / "v_hat.csv")
    dump_field_csv(result.u_tilde, out / "u_tilde.csv")
    dump_field_csv(result.v_tilde, out / "v_tilde.csv")
    _write_json(out / "summary.json", result.summary_json())
    print(f"demo separation={result.separation:.6g} "
          f"worst_residual={max(result.report_hat.worst(), result.report_tilde.worst()):.6g} out={out}")
    return 0


def run_verify(cfg: ExperimentConfig) -> int:
    grid = _build_grid(cfg)
    mc = _build_membrane_config(cfg, grid)
    out = _out_dir(cfg)
    mono_tol = _as_float(cfg, "verify", "monotonicity_tol", 1.0e-8)
    ord_tol = _as_float(cfg, "verify", "ordering_tol", 1.0e-8)
    bnd_tol = _as_float(cfg, "verify", "boundary_tol", 0.0)
    comp_tol = _as_float(cfg, "verify", "complementarity_tol", 1.0e-6)
    res_tol = _as_float(cfg, "verify", "residual_tol", 1.0e-6)

    try:
        trace = iterate(mc)
    except InnerSolveFailed as exc:
        log.error("inner solve failed at outer step %d", exc.step)
        return 4
    _dump_trace(trace, out)

    audits = audit_trace(trace, mc.boundary_f, mc.boundary_g,
                         monotonicity_tol=mono_tol, ordering_tol=ord_tol, boundary_tol=bnd_tol)
    last = trace.final()
    audits.append(AuditReport(
        name="outer_convergence", passed=trace.converged,
        worst_value=float(last.sup_du if last.sup_du is not None else 0.0),
        worst_node=-1, tolerance=mc.tol,
    ))
    for name, fld, spec, side, obstacle, bnd in (
        ("complementarity_u", last.u, mc.spec1, BELOW, last.v, mc.boundary_f),
        ("complementarity_v", last.v, mc.spec2, ABOVE, last.u, mc.boundary_g),
    ):
        problem = ObstacleProblem(spec=spec, side=side, obstacle=obstacle, boundary=bnd)
        d = complementarity_defect(problem, fld)
        audits.append(AuditReport(
            name=name, passed=bool(d.sup <= comp_tol),
            worst_value=d.sup, worst_node=d.node, tolerance=comp_tol,
        ))
    rep = two_membrane_residual(last.u, last.v, mc.spec1, mc.spec2, mc.boundary_f, mc.boundary_g)
    audits.append(AuditReport(
        name="system_residual", passed=rep.passed(res_tol),
        worst_value=rep.worst(), worst_node=rep.worst_u_node, tolerance=res_tol,
    ))

    _write_json(out / "audits.json", [a.to_json() for a in audits])
    failed = sum(1 for a in audits if not a.passed)
    for a in audits:
        print(f"audit {a.name}: {'pass' if a.passed else 'FAIL'} "
              f"(worst={a.worst_value:.3g}, tol={a.tolerance:.3g})")
    print(f"verify failed_audits={failed} out={out}")
    return failed


def run_refine(cfg: ExperimentConfig) -> int:
    try:
        ns = [int(s) for s in cfg.require("refine", "ns").split(",")]
    except ValueError as exc:
        raise ConfigError(f"[refine] ns must be comma-separated integers: {exc}") from exc
    reference = cfg.require("refine", "reference")
    try:
        parse_expression(reference)
    except ExpressionError as exc:
        raise ConfigError(f"[refine] reference: {exc}") from exc
    out = _out_dir(cfg)
    tol = cfg.tol_override if cfg.tol_override is not None else _as_float(cfg, "solver", "tol", 1.0e-10)
    method = cfg.get("solver", "method", "auto")

    def build(n: int) -> ObstacleProblem:
        sub = ExperimentConfig(sections=cfg.sections, n_override=n)
        grid = _build_grid(sub)
        return _build_obstacle_problem(sub, grid)

    probe = build(ns[0])
    if isinstance(probe.spec, Variational) and method == "auto":
        method = "psor" if probe.spec.p == 2.0 else "projected_gradient"
    study = grid_refinement_study(build, reference, ns, method=method, tol=tol,
                                  omega=_as_float(cfg, "solver", "omega", 1.5),
                                  damping=_as_float(cfg, "solver", "damping", 1.0))
    (out / "refinement.csv").write_text("\n".join(study.csv_rows()) + "\n")
    for row, line in zip(study.rows, list(study.csv_rows())[1:]):
        log.info("refine n=%d sup_error=%.3g", row.n, row.sup_error)
    ratios = ", ".join(f"{r:.3f}" for r in study.ratios())
    print(f"refine ns={ns} ratios=[{ratios}] out={out}")
    return 0


def run(cfg: ExperimentConfig, subcommand: str) -> int:
    """Validate required keys for the subcommand and dispatch."""
    if subcommand not in _REQUIRED:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    for section, key in _REQUIRED[subcommand]:
        cfg.require(section, key)
    runner = {
        "solve": run_solve,
        "iterate": run_iterate,
        "demo": run_demo,
        "verify": run_verify,
        "refine": run_refine,
    }[subcommand]
    return runner(cfg)


def _setup_logging() -> None:
    level_name = os.environ.get("MEMBRANE_LOG", "info").lower()
    levels = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    level = levels.get(level_name)
    if level is None:
        level = logging.INFO
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if level_name not in levels:
        log.warning("MEMBRANE_LOG=%s not recognized; using info", level_name)


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="twomembranes",
        description="Obstacle problems and two-membrane iterations on uniform grids.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("solve", "iterate", "demo", "verify", "refine"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config path")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--n", type=int, default=None, help="grid resolution override")
        p.add_argument("--tol", type=float, default=None, help="solver tolerance override")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.subcommand == "demo":
            cfg = ExperimentConfig(sections={})
        else:
            parser.error(f"{args.subcommand} requires --config")
        if args.subcommand != "demo":
            cfg.n_override = args.n
            cfg.tol_override = args.tol
        cfg.out_override = args.out
        return run(cfg, args.subcommand)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleProblem, RejectedSeed) as exc:
        log.error("infeasible: %s", exc)
        print(f"infeasible problem: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
