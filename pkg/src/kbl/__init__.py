"""Numerical laboratory for Krylov solvability of inverse linear problems
on truncated sequence spaces.

Sign convention used throughout: ``R(zeta, A) = (A - zeta I)^(-1)``.
"""

from .errors import KblError
from .operators import (
    Operator,
    SpectralEstimate,
    apply,
    dense,
    diagonal,
    induced_norm,
    shift,
    spectral_radius,
    volterra_matrix,
    volterra_resolvent_exact,
)
from .spaces import Mask, SpaceSpec, Vector, basis_vector, decompose, graph_norm, mask_project, norm

__all__ = [
    "KblError",
    "Mask",
    "Operator",
    "SpaceSpec",
    "SpectralEstimate",
    "Vector",
    "apply",
    "basis_vector",
    "decompose",
    "dense",
    "diagonal",
    "graph_norm",
    "induced_norm",
    "mask_project",
    "norm",
    "shift",
    "spectral_radius",
    "volterra_matrix",
    "volterra_resolvent_exact",
]

__version__ = "0.1.0"
