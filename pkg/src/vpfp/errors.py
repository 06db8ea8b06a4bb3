"""Exception types raised by the solver components."""


class VpfpError(Exception):
    """Base class for all solver errors."""


class CompatibilityError(VpfpError):
    """Poisson right-hand side has a nonzero mean beyond tolerance."""


class QuadratureOverflowError(VpfpError):
    """Initial data produced non-finite values at quadrature nodes."""


class NonpositiveDensityError(VpfpError):
    """Moment evaluation encountered alpha_0 <= 0."""


class NewtonConvergenceError(VpfpError):
    """Damped Newton failed to reach the residual tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BracketError(VpfpError):
    """Temperature root finding could not bracket the energy budget."""


class PicardDivergenceError(VpfpError):
    """Picard iteration hit the iteration cap before converging."""

    def __init__(self, message, last_increment=None, iterations=None):
        super().__init__(message)
        self.last_increment = last_increment
        self.iterations = iterations


class AdmissibilityError(VpfpError):
    """Initial data violates a scenario admissibility requirement."""


class ConfigError(VpfpError):
    """Malformed or inconsistent run configuration."""
