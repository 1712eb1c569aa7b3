"""Linear inviscid damping and vorticity depletion for symmetric shear flows.

Numerical library and CLI: Rayleigh-equation solutions through the critical
layer, spectral quantities (A, B, A2, B2, J), damping kernels K_o/K_e, the
oscillatory-integral time evolution, and an independent matrix-exponential
oracle for cross-validation.
"""

__version__ = "0.1.0"

from . import errors
from .profiles import build_profile, critical_value, sqrt_coordinate

__all__ = ["errors", "build_profile", "critical_value", "sqrt_coordinate", "__version__"]
