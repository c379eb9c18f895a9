"""Small-data nonlinear run: Picard iteration against the direct solver.

Solves the mild formulation with m = 3, q = 5 (a supercritical power) for a
small Gaussian, reports the Picard contraction history, the agreement of the
two solvers, fitted decay exponents, and the space-time integral that sets
the size of the second asymptotic term.

Run:  python demos/nonlinear_decay.py
"""
import numpy as np

from ddlab import data
from ddlab.grid import make_grid
from ddlab.nonlinear import NonlinearProblem, decay_check, direct_solve, picard_solve, supercritical_coefficient


def main() -> None:
    grid = make_grid(1024, 100.0)
    v0 = data.scale_to_smallness(data.gaussian(grid, 0.0, 1.0), 0.1)
    m, q = 3.0, 5.0
    short = NonlinearProblem(m, q, "abs_power", v0, 8.0)
    pic = picard_solve(short)
    dirc = direct_solve(short)
    print("Picard increments:", " ".join(f"{x:.2e}" for x in pic.aux["increments"]))
    print("contraction ratios:", " ".join(f"{x:.3f}" for x in pic.aux["contraction_ratios"]))
    gap = np.sqrt(np.max(np.sum((pic.values - dirc.values) ** 2, axis=1)) * grid.dx)
    print(f"max L2 gap between solvers on [0, 8]: {gap:.2e}")

    times = tuple(np.concatenate([[0.0], np.round(np.geomspace(32.0, 128.0, 9), 2)]))
    long = NonlinearProblem(m, q, "abs_power", v0, 128.0, sample_times=times)
    traj = direct_solve(long)
    fits = decay_check(traj, m)
    for name, fit, predicted in (("L2", fits.l2, -1 / (2 * m)), ("dx L2", fits.dx_l2, -1.5 / m),
                                 ("Linf", fits.linf, -1 / m)):
        print(f"{name:6s} slope {fit.exponent:+.4f}  (linear prediction {predicted:+.4f})")
    coeff = supercritical_coefficient(traj, q, "abs_power")
    print(f"space-time integral of |v|^q: {coeff.value:.6e} (tail share {coeff.tail_bound / abs(coeff.value):.1%})")


if __name__ == "__main__":
    main()
