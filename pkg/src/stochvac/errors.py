"""Exception hierarchy shared by all modules."""


class StochVacError(Exception):
    """Base class for library errors."""


class DomainError(StochVacError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericError(StochVacError, ArithmeticError):
    """A computed quantity came out non-finite."""


class NodalRegionError(DomainError):
    """A modulus (or density) is at or below the nodal threshold, so its log is singular."""


class UndefinedDistributionError(DomainError):
    """Total occupation N(p) vanishes, so P_j = n_j / N is undefined."""


class RangeError(DomainError):
    """A finite-difference stencil would leave the sampled grid."""


class ConfigError(StochVacError, ValueError):
    """Invalid scenario or grid configuration. ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
