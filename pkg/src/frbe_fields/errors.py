"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. Gamma at a non-positive integer)."""


class SingularityError(ValueError):
    """A quadrature or simulation node sits exactly on a spectral singularity."""


class PreconditionError(ValueError):
    """The inputs violate a structural precondition (for example the wrong spectrum case)."""


class ToleranceError(RuntimeError):
    """Numerical integration could not certify the requested tolerance."""


class LatticeMismatchError(ValueError):
    """Samples in an ensemble do not share lattice or provenance."""


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class UnsupportedKernelError(PreconditionError):
    """The operation has no closed form for this kernel family."""


class InsufficientLagsError(PreconditionError):
    """The lattice does not offer enough lags for a variogram fit."""
