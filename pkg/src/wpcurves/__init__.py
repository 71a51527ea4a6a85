"""Numerics for Weil-Petersson curves: boundary operators, Besov-type norms,
conformal welding, curve Cauchy transforms and quasiconformal extensions."""

__version__ = "0.1.0"

from .grid import CircleGrid, GridFunction, make_grid, sample
from .norms import NormKind, analytic_seminorm, boundary_seminorm
from .operators import QuasisymmetricMap, compose_operator, exp_integral, log_derivative
from .transforms import hilbert_circle, hilbert_line, riesz_project
from .welding import conformal_weld, curve_from_schlicht

__all__ = [
    "CircleGrid", "GridFunction", "make_grid", "sample",
    "NormKind", "analytic_seminorm", "boundary_seminorm",
    "QuasisymmetricMap", "compose_operator", "exp_integral", "log_derivative",
    "hilbert_circle", "hilbert_line", "riesz_project",
    "conformal_weld", "curve_from_schlicht",
]
