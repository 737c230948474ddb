"""Comparison geometry for globally hyperbolic warped-product spacetimes.

Closed-form comparison models, a Riccati comparison engine, geodesics and
time separation in generalized Robertson-Walker spacetimes, Busemann
functions of hypersurface rays, and area/volume comparison with rigidity
checks.
"""

__version__ = "0.1.0"

from .models import DomainError, ModelParams, WarpingProfile, build_profile, profile, s_kappa
from .spacetime import Graph, Point, Slice, Spacetime, flat_product, time_reverse

__all__ = [
    "DomainError",
    "Graph",
    "ModelParams",
    "Point",
    "Slice",
    "Spacetime",
    "WarpingProfile",
    "__version__",
    "build_profile",
    "flat_product",
    "profile",
    "s_kappa",
    "time_reverse",
]
