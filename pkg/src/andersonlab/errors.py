"""Exception types shared across the package."""


class AndersonLabError(Exception):
    """Base class for all package-specific errors."""


class NoDensityError(AndersonLabError):
    """Raised when an operation requires an absolutely continuous
    single-site distribution but was given one made of atoms."""


class SingularShiftError(AndersonLabError):
    """Raised when a real-energy linear solve hits (or nearly hits) an
    eigenvalue of the finite-volume Hamiltonian."""


class QuadratureError(AndersonLabError):
    """Raised when adaptive quadrature fails to reach the requested
    tolerance within the documented refinement budget."""


class CyclicityError(AndersonLabError):
    """Raised when the probe vector of a rank-one family is not cyclic
    for the unperturbed operator (Krylov matrix numerically rank-deficient)."""


class FitError(AndersonLabError):
    """Raised when a decay fit has fewer than the required number of
    usable data points."""


class ConfigError(AndersonLabError):
    """Raised on invalid experiment configuration (missing, unknown or
    ill-typed keys; cross-field rule violations)."""
