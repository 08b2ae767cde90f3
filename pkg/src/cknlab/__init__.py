"""Numerical toolkit for the radial weighted Caffarelli-Kohn-Nirenberg inequality."""

from .params import CknParams, DegeneracyReport, classify_degeneracy, derive, validate
from .closed_forms import extremal, sharp_constant, w0_function, wk_function
from .radial import RadialFunction
from .radial_quadrature import make_grid, d1p_norm, lp_star_norm, rayleigh_quotient
from .spectrum import assemble_mode, eigen_solve, full_spectrum, spectral_gap
from .stability import deficit, project_to_manifold, quotient_scan

__version__ = "0.1.0"

__all__ = [
    "CknParams", "DegeneracyReport", "classify_degeneracy", "derive", "validate",
    "extremal", "sharp_constant", "w0_function", "wk_function", "RadialFunction",
    "make_grid", "d1p_norm", "lp_star_norm", "rayleigh_quotient",
    "assemble_mode", "eigen_solve", "full_spectrum", "spectral_gap",
    "deficit", "project_to_manifold", "quotient_scan",
]
