"""How much each extra expansion term buys for the linear bbm-type flow.

For smooth data v0 and m = 2, compares S(t) v0 with partial expansions of
order N = 0, 1, 2 built from moments of v0 and derivatives of G_2.  After
scaling by t^((1 - 1/p)/m + N/m) the residual still falls like t^(-1/m),
because the first omitted term has order N + 1.

Run:  python demos/expansion_residuals.py
"""
import numpy as np

from ddlab import data
from ddlab.analysis import fit_power_law
from ddlab.expansion import linear_expansion_integer_m, residual_norm
from ddlab.grid import make_grid
from ddlab.semigroups import PhaseFunction, apply_semigroup


def main() -> None:
    m, p = 2.0, 2.0
    grid = make_grid(8192, 600.0)
    v0 = data.gaussian(grid, 0.5, 0.5)
    phase = PhaseFunction("bbm", m)
    times = np.geomspace(16.0, 256.0, 9)
    exact = [apply_semigroup(phase, t, v0) for t in times]
    for N in (0, 1, 2):
        res = [residual_norm(e, linear_expansion_integer_m(v0, N, m, t), p) for e, t in zip(exact, times)]
        scale = (1 - 1 / p) / m + N / m
        scaled = np.array(res) * times**scale
        fit = fit_power_law(times, scaled)
        print(f"N={N}: residual at t={times[-1]:g} is {res[-1]:.3e}; scaled-residual slope {fit.exponent:+.3f}")


if __name__ == "__main__":
    main()
