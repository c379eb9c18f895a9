"""Large-time decay of the fractional heat kernel and its derivatives.

Samples G_m(., t) and d_x G_m(., t) on a wide grid, compares grid L2 norms
with the Gamma-function closed form, and fits L^p decay exponents.

Run:  python demos/kernel_decay.py
"""
import numpy as np

from ddlab.analysis import fit_power_law
from ddlab.grid import lp_norm, make_grid
from ddlab.kernels import KernelSpec, derivative_kernel, kernel_l2_closed_form


def main() -> None:
    grid = make_grid(4096, 400.0)
    times = np.geomspace(1.0, 64.0, 9)
    print("m    j  p    fitted   predicted   max rel. L2 error vs closed form")
    for m in (2.0, 2.5, 3.0):
        for j in (0, 1):
            fields = [derivative_kernel(KernelSpec(m, t, alpha=j), grid) for t in times]
            l2_err = max(abs(lp_norm(f, 2) - kernel_l2_closed_form(m, j, t)) / kernel_l2_closed_form(m, j, t)
                         for f, t in zip(fields, times))
            for p in (1.0, 2.0, np.inf):
                fit = fit_power_law(times, [lp_norm(f, p) for f in fields])
                predicted = -j / m - (1 - 1 / p) / m
                print(f"{m:<4} {j}  {p:<4} {fit.exponent:8.4f} {predicted:9.4f}   {l2_err:.1e}")


if __name__ == "__main__":
    main()
