"""Discrete obstacle problems and monotone two-membrane iterations.

Finite-difference obstacle problems for the variational p-Laplacian and
the normalized (game-theoretic) p-Laplacian on uniform grids over the
unit interval and unit square, a monotone outer iteration coupling two
membranes through mutual obstacles, and audit tooling that checks the
structural guarantees (monotonicity, ordering, complementarity) on
computed runs.
"""

from .errors import (
    ConfigError,
    DemoFailed,
    ExpressionError,
    GridMismatch,
    InfeasibleProblem,
    InnerSolveFailed,
    InvalidResolution,
    RejectedSeed,
    SamplingError,
)
from .expressions import Expression, parse_expression
from .grid import (
    OBSTACLE_ABSENT_ABOVE,
    OBSTACLE_ABSENT_BELOW,
    Grid,
    ScalarField,
    absent_obstacle,
    build_grid,
    check_same_grid,
    constant_field,
    dump_field_csv,
    load_field_csv,
    sample,
)
from .membranes import (
    DECREASING_FROM_SUPER,
    INCREASING_FROM_SUB,
    DemoResult,
    IterationTrace,
    MembraneConfig,
    TraceStep,
    TwoMembraneReport,
    iterate,
    nonuniqueness_demo,
    two_membrane_residual,
)
from .operators import (
    NEITHER,
    SOLUTION,
    SUBSOLUTION,
    SUPERSOLUTION,
    Classification,
    NormalizedPLaplacian,
    OperatorSpec,
    Variational,
    classify,
    energy,
    energy_gradient,
    residual,
    residual_variational,
    residual_viscosity,
)
from .variational_obstacle import (
    ABOVE,
    BELOW,
    DefectReport,
    ObstacleProblem,
    SolveReport,
    check_compatibility,
    complementarity_defect,
    contact_nodes,
    dualize,
    initial_iterate,
    projected_gradient_solve,
    psor_sweep,
    solve_obstacle,
)
from .verify import (
    AuditReport,
    RefinementStudy,
    audit_complementarity,
    audit_cross_solver,
    audit_trace,
    grid_refinement_study,
)
from .viscosity_obstacle import (
    ComparisonReport,
    SchemeConfig,
    comparison_check,
    local_solve,
    solve_visc_obstacle,
)

__version__ = "0.1.0"

__all__ = [
    "ABOVE",
    "BELOW",
    "DECREASING_FROM_SUPER",
    "INCREASING_FROM_SUB",
    "NEITHER",
    "OBSTACLE_ABSENT_ABOVE",
    "OBSTACLE_ABSENT_BELOW",
    "SOLUTION",
    "SUBSOLUTION",
    "SUPERSOLUTION",
    "AuditReport",
    "Classification",
    "ComparisonReport",
    "ConfigError",
    "DefectReport",
    "DemoFailed",
    "DemoResult",
    "Expression",
    "ExpressionError",
    "Grid",
    "GridMismatch",
    "InfeasibleProblem",
    "InnerSolveFailed",
    "InvalidResolution",
    "IterationTrace",
    "MembraneConfig",
    "NormalizedPLaplacian",
    "ObstacleProblem",
    "OperatorSpec",
    "RefinementStudy",
    "RejectedSeed",
    "SamplingError",
    "ScalarField",
    "SchemeConfig",
    "SolveReport",
    "TraceStep",
    "TwoMembraneReport",
    "Variational",
    "absent_obstacle",
    "audit_complementarity",
    "audit_cross_solver",
    "audit_trace",
    "build_grid",
    "check_compatibility",
    "check_same_grid",
    "classify",
    "comparison_check",
    "complementarity_defect",
    "constant_field",
    "contact_nodes",
    "dualize",
    "dump_field_csv",
    "energy",
    "energy_gradient",
    "grid_refinement_study",
    "initial_iterate",
    "iterate",
    "load_field_csv",
    "local_solve",
    "nonuniqueness_demo",
    "parse_expression",
    "projected_gradient_solve",
    "psor_sweep",
    "residual",
    "residual_variational",
    "residual_viscosity",
    "sample",
    "solve_obstacle",
    "solve_visc_obstacle",
    "two_membrane_residual",
]
