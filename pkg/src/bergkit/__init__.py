"""bergkit: numerical operator theory on weighted Bergman spaces over the
unit disc — radial weights, reproducing kernels, Berezin transforms,
Carleson-type quantities, Toeplitz and composition operator matrices."""

from ._core import BACKEND
from .weights import RadialWeight, standard, log_weight, exponential, user_weight

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "RadialWeight",
    "standard",
    "log_weight",
    "exponential",
    "user_weight",
]
