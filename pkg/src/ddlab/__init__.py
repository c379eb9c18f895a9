"""Pseudo-spectral lab for dissipative-dispersive equations with ``M = |d_x|^m``.

Submodules
----------
grid        periodic grids, transforms, multipliers and norms
kernels     generalized heat kernels, Bessel-type kernels, derivatives
semigroups  exact linear evolutions (heat, bbm, kdv phases)
expansion   moments and asymptotic-expansion partial sums
nonlinear   Picard and integrating-factor solvers, second-term profiles
analysis    power-law fits and convolution-integral checks
data        initial-data families
cli         command-line runner
"""
from .analysis import RateFit, check_convolution_inequality, fit_power_law
from .expansion import (
    ExpansionTerm,
    MomentVector,
    heat_expansion,
    kdv_expansion,
    linear_expansion_fractional_m,
    linear_expansion_integer_m,
    moments,
    preliminary_expansion_with_K,
    residual_norm,
)
from .grid import Field, SpectralGrid, Spectrum, apply_multiplier, forward, inverse, lp_norm, make_grid
from .kernels import KernelSpec, bessel_kernel, derivative_kernel, gamma, heat_kernel, kernel_l2_closed_form
from .nonlinear import (
    NonlinearProblem,
    WeightedNorm,
    decay_check,
    direct_solve,
    nonlinearity,
    picard_solve,
    second_term_profile,
)
from .semigroups import PhaseFunction, Trajectory, apply_semigroup, semigroup_property_check, traveling_frame

__version__ = "0.1.0"
