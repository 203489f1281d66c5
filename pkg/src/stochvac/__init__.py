"""Numerical verification of a stochastic vacuum oscillator model in six-dimensional space."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DomainError,
    NodalRegionError,
    NumericError,
    RangeError,
    StochVacError,
    UndefinedDistributionError,
)
from .geometry6 import NATURAL, Constants, E6Point  # noqa: E402

__all__ = [
    "__version__",
    "Constants",
    "NATURAL",
    "E6Point",
    "StochVacError",
    "DomainError",
    "NumericError",
    "NodalRegionError",
    "UndefinedDistributionError",
    "RangeError",
    "ConfigError",
]
