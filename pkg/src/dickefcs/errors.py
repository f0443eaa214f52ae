"""Exception types shared across the package."""


class FcsError(Exception):
    """Base class for all package-specific errors."""


class DegenerateCouplingsError(FcsError, ValueError):
    """Raised when all reservoir couplings vanish (no transport possible)."""


class UnknownReservoirError(FcsError, ValueError):
    """Raised when a counting assignment references a reservoir that does not exist."""


class EigenvalueCrossingError(FcsError, RuntimeError):
    """Raised when branch continuation of the dominant eigenvalue becomes ambiguous."""


class NonUniqueStationaryStateError(FcsError, RuntimeError):
    """Raised when the rate generator has more than one stationary direction."""


class SingularSolveError(FcsError, RuntimeError):
    """Raised when a projected linear solve is too ill-conditioned to trust."""


class SeriesBranchError(FcsError, ValueError):
    """Raised when a series/asymptote branch is evaluated outside its validity range."""


class WindowOverflowError(FcsError, RuntimeError):
    """Raised when the count window would have to grow past the configured cap."""


class QuadratureError(FcsError, RuntimeError):
    """Raised when the counting-field quadrature does not converge under refinement."""


class AffinityDivergenceError(FcsError, ValueError):
    """Raised when the affinity is undefined (a counted occupation is zero)."""


class InsufficientStatisticsError(FcsError, RuntimeError):
    """Raised when a probability needed for a ratio test is below the floor."""


class SizeCapError(FcsError, ValueError):
    """Raised when the full product-space treatment is requested beyond its size cap."""


class ValidationFailure(FcsError, RuntimeError):
    """Raised by cross-validation when two computation routes disagree."""
