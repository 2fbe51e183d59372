"""Uniform lattices on (0,1) and (0,1)^2 and scalar fields living on them.

Nodes are ordered lexicographically by coordinate: in 1D by x, in 2D by
(x, y) with x varying slowest, so flat index = ix * n + iy. Spacing is
h = 1/(n-1) per axis. Boundary nodes are the lattice endpoints (1D) or the
square's perimeter (2D); every solver in the package pins Dirichlet data
on exactly this mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, InvalidResolution, SamplingError
from .expressions import parse_expression

# Obstacle sentinel: a constant field at -1e9 (below) or +1e9 (above) is
# treated by the solvers as "no obstacle"; it is never active and never
# enters contact sets.
OBSTACLE_ABSENT_BELOW = -1.0e9
OBSTACLE_ABSENT_ABOVE = 1.0e9


@dataclass(frozen=True)
class Grid:
    dim: int
    n_per_axis: int
    h: float
    xs: np.ndarray = field(repr=False)          # axis coordinates, shape (n,)
    boundary_mask: np.ndarray = field(repr=False)  # flat bool, True on boundary

    @property
    def n_nodes(self) -> int:
        return self.n_per_axis ** self.dim

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    def coords(self) -> tuple[np.ndarray, ...]:
        """Flat coordinate arrays, one per axis, in node order."""
        n = self.n_per_axis
        if self.dim == 1:
            return (self.xs.copy(),)
        X = np.repeat(self.xs, n)
        Y = np.tile(self.xs, n)
        return X, Y

    def node_coords(self, idx: int) -> tuple[float, ...]:
        n = self.n_per_axis
        if self.dim == 1:
            return (float(self.xs[idx]),)
        return float(self.xs[idx // n]), float(self.xs[idx % n])

    def describe_node(self, idx: int) -> str:
        pt = ", ".join(f"{c:.6g}" for c in self.node_coords(idx))
        return f"node {idx} at ({pt})"


@dataclass
class ScalarField:
    """Node values on a grid, flat in lexicographic node order.

    Treated as immutable after construction; operations return new fields.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.n_nodes)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def build_grid(dim: int, n_per_axis: int) -> Grid:
    """Build a uniform grid; n_per_axis counts nodes per axis including endpoints."""
    if dim not in (1, 2):
        raise InvalidResolution(f"dim must be 1 or 2, got {dim}")
    n = int(n_per_axis)
    if n < 3:
        raise InvalidResolution(f"need at least 3 nodes per axis, got {n}")
    h = 1.0 / (n - 1)
    xs = np.linspace(0.0, 1.0, n)
    if dim == 1:
        mask = np.zeros(n, dtype=bool)
        mask[0] = mask[-1] = True
    else:
        m2 = np.zeros((n, n), dtype=bool)
        m2[0, :] = m2[-1, :] = m2[:, 0] = m2[:, -1] = True
        mask = m2.reshape(-1)
    mask.setflags(write=False)
    xs.setflags(write=False)
    return Grid(dim=dim, n_per_axis=n, h=h, xs=xs, boundary_mask=mask)


def sample(grid: Grid, expr) -> ScalarField:
    """Evaluate a closed-form descriptor at every node.

    `expr` may be an expression string (see expressions module), a python
    callable taking coordinate arrays, or a plain number.
    """
    coords = grid.coords()
    if isinstance(expr, str):
        expr = parse_expression(expr)
    if callable(expr):
        try:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = expr(*coords)
        except (ZeroDivisionError, OverflowError) as exc:
            # scalar subexpressions fail loudly where arrays would yield inf/nan
            raise SamplingError(f"expression evaluation failed: {exc}") from exc
    else:
        vals = np.full(grid.n_nodes, float(expr))
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (grid.n_nodes,)).copy()
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = int(np.argmax(bad))
        raise SamplingError(
            f"expression produced non-finite value {vals[idx]!r} at {grid.describe_node(idx)}"
        )
    return ScalarField(grid, vals)


def constant_field(grid: Grid, value: float) -> ScalarField:
    return ScalarField(grid, np.full(grid.n_nodes, float(value)))


def absent_obstacle(grid: Grid, side: str) -> ScalarField:
    """Sentinel obstacle for the given side ('below' or 'above')."""
    if side == "below":
        return constant_field(grid, OBSTACLE_ABSENT_BELOW)
    if side == "above":
        return constant_field(grid, OBSTACLE_ABSENT_ABOVE)
    raise ValueError(f"side must be 'below' or 'above', got {side!r}")


def check_same_grid(*fields: ScalarField) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid.dim != g.dim or f.grid.n_per_axis != g.n_per_axis:
            raise GridMismatch(
                f"fields on different grids: dim={g.dim},n={g.n_per_axis} vs "
                f"dim={f.grid.dim},n={f.grid.n_per_axis}"
            )
    return g


def dump_field_csv(fld: ScalarField, path) -> None:
    """Write `x[,y],value` rows, one per node, in node order, 17 significant digits."""
    g = fld.grid
    coords = g.coords()
    header = "x,value" if g.dim == 1 else "x,y,value"
    lines = [header]
    for i in range(g.n_nodes):
        cells = [f"{c[i]:.17g}" for c in coords] + [f"{fld.values[i]:.17g}"]
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field_csv(grid: Grid, path) -> ScalarField:
    """Read a field written by dump_field_csv back onto a matching grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] != grid.n_nodes:
        raise GridMismatch(f"file has {data.shape[0]} rows, grid has {grid.n_nodes} nodes")
    return ScalarField(grid, data[:, -1])
