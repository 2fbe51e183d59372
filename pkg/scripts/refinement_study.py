"""Grid refinement study against a manufactured solution.

The default problem is -u'' = pi^2 sin(pi x) with zero boundary data,
whose solution sin(pi x) is smooth, so the centered scheme converges at
second order: each doubling of the resolution should cut the sup error
by a factor near 4.
"""

import argparse

from twomembranes import (
    ObstacleProblem,
    Variational,
    absent_obstacle,
    build_grid,
    grid_refinement_study,
    sample,
)

PI = "3.141592653589793"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="26,51,101,201",
                    help="comma-separated interior resolutions")
    ap.add_argument("--source", default=f"-({PI}^2)*sin({PI}*x)",
                    help="source term h of -u'' + h = 0")
    ap.add_argument("--reference", default=f"sin({PI}*x)",
                    help="exact solution expression")
    ap.add_argument("--boundary", default="0", help="boundary data")
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    ns = [int(s) for s in args.ns.split(",")]

    def make_problem(n):
        grid = build_grid(1, n)
        spec = Variational(p=2.0, source=sample(grid, args.source))
        return ObstacleProblem(
            spec=spec,
            side="below",
            obstacle=absent_obstacle(grid, "below"),
            boundary=sample(grid, args.boundary),
        )

    study = grid_refinement_study(make_problem, args.reference, ns,
                                  method="psor", tol=args.tol)
    print(f"{'n':>6}  {'h':>10}  {'sup error':>12}  {'ratio':>7}")
    prev = None
    for r in study.rows:
        ratio = "" if prev is None else f"{prev / r.sup_error:.3f}"
        print(f"{r.n:>6}  {r.h:>10.6f}  {r.sup_error:>12.4e}  {ratio:>7}")
        prev = r.sup_error


if __name__ == "__main__":
    main()
