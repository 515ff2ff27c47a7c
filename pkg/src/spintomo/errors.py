"""Exception types shared across the package."""


class DegenerateFrameError(ValueError):
    """Projector set is (numerically) linearly dependent; no dual frame exists."""


class FrameSearchError(RuntimeError):
    """Rejection sampling failed to find a well-conditioned projector frame."""


class InvalidStateError(ValueError):
    """Input violates a state precondition (Hermiticity, trace, positivity)."""


class UndersampledDomainError(ValueError):
    """Tomogram domain too coarse for the requested inversion."""


class SchemeMismatchError(ValueError):
    """Propagation scheme not applicable to the requested operation."""


class UnsupportedPotentialError(ValueError):
    """Field outside the exactly-truncating class (quadratic potential, uniform fields)."""


class UnsupportedInverseError(ValueError):
    """Requested inverse map is ill-posed by design (e.g. Husimi deconvolution)."""


class ConfigError(ValueError):
    """Scenario configuration is malformed; message carries the offending field path."""
