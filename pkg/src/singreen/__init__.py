"""
Green's functions for the Schrodinger equation with singular potentials.

Potentials behave like ``r^-rho`` at the origin.  The package builds radial
solutions and partial-wave Green's functions, extracts their short-range
asymptotes, and assembles a zero-range interaction on top.
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, DomainError, IllConditionedError, IntegrationError,
                     PoleError, SingreenError, SingularConfigurationError,
                     UnsupportedClassError)
from .potentials import (PotentialSpec, SingularityClass, classify, coulomb, power_exp,
                         power_tail, screened_coulomb)

__all__ = [
    "__version__", "PotentialSpec", "SingularityClass", "classify", "coulomb",
    "power_exp", "power_tail", "screened_coulomb", "SingreenError", "DomainError",
    "UnsupportedClassError", "AccuracyError", "PoleError", "SingularConfigurationError",
    "IllConditionedError", "IntegrationError",
]
