"""Fractional Fisher-KPP models, their small-step and long-range scalings,
and the limiting Hamilton-Jacobi problems.

Modules
-------
core
    Grids, fields with far-field continuation, reactions and run configs.
kernels
    Quadrature of the small-step jump kernel.
operators
    Fractional Laplacian (spectral and quadrature), jump operator and the
    bound checks for ``g(x) = 1 / (1 + |x|^{1+alpha})``.
dynamics
    Time steppers, the mass ODE and the ``run`` driver.
asymptotics
    Hopf-Cole transforms, front tracking and the long-range ladder checks.
hamilton_jacobi
    Hamiltonian tables, the monotone solver and the small-step ladder check.
cli
    Command-line entry point.
"""
from __future__ import annotations

from .core import (ConfigError, Field, FracOrder, Grid, NumericalAbort, Reaction, RunConfig,
                   field_from_initial, make_grid, mass)
from .dynamics import Trajectory, mass_ode_solve, run
from .hamilton_jacobi import Hamiltonian, hamiltonian_eval, hj_solve
from .kernels import KernelQuadrature
from .operators import (frac_laplacian_quadrature, frac_laplacian_spectral, lemma_g_bound,
                        lemma_g_bound_2d, sme_jump_operator)

__all__ = [
    "ConfigError", "Field", "FracOrder", "Grid", "Hamiltonian", "KernelQuadrature",
    "NumericalAbort", "Reaction", "RunConfig", "Trajectory", "field_from_initial",
    "frac_laplacian_quadrature", "frac_laplacian_spectral", "hamiltonian_eval", "hj_solve",
    "lemma_g_bound", "lemma_g_bound_2d", "make_grid", "mass", "mass_ode_solve", "run",
    "sme_jump_operator",
]
