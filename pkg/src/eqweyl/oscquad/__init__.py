"""Direct quadrature of oscillatory integrals and asymptotic-model fitting."""
from .backend import COMPILED_AVAILABLE
from .fit import AsymptoticFit, FitError, fit_asymptotics, read_samples, write_samples
from .quadrature import QuadratureError, QuadratureResult, QuadratureSpec, integrate

__all__ = [
    "COMPILED_AVAILABLE",
    "AsymptoticFit",
    "FitError",
    "QuadratureError",
    "QuadratureResult",
    "QuadratureSpec",
    "fit_asymptotics",
    "integrate",
    "read_samples",
    "write_samples",
]
