"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid scenario, geometry or solver configuration."""


class ContractViolation(RuntimeError):
    """Inputs that are individually valid but inconsistent with each other."""


class ZeroForcingInfeasible(ValueError):
    """The zero-forcing constraints cannot be met (too few antennas or rank loss)."""


class EstimationError(ValueError):
    """Not enough samples to produce a meaningful empirical estimate."""


class ScaError(RuntimeError):
    """Raised by the SCA driver on an infeasible start or a non-monotone step."""
