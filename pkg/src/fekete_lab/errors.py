"""Exception types shared across the package."""


class FeketeError(Exception):
    """Base class for all errors raised by fekete_lab."""


class NonFiniteCoordinate(FeketeError, ValueError):
    pass


class UnsupportedVectorKind(FeketeError, TypeError):
    pass


class DimensionMismatch(FeketeError, ValueError):
    pass


class InvalidEpsilon(FeketeError, ValueError):
    pass


class OutOfRange(FeketeError, ValueError):
    pass


class IndexBelowStart(FeketeError, ValueError):
    pass


class NonUnitInput(FeketeError, ValueError):
    pass


class GeneratorFailure(FeketeError, RuntimeError):
    """A sequence generator raised while producing the vector at ``index``."""

    def __init__(self, family, index, cause):
        self.family = family
        self.index = index
        self.cause = cause
        super().__init__(f"family {family!r} failed at n={index}: {cause!r}")


class HypothesisViolated(FeketeError, ValueError):
    pass


class ZeroVectorInSet(FeketeError, ValueError):
    pass


class ZeroVectorNormalization(FeketeError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"cannot normalize zero vector at n={index}")


class BandViolation(FeketeError, ValueError):
    pass


class SpecParseError(FeketeError, ValueError):
    """Malformed family, band, space or config specification string."""
