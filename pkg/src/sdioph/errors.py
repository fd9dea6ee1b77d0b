"""Exception hierarchy shared by every module."""


class SdiophError(Exception):
    """Base class for all library errors."""


class InvalidPlaceError(SdiophError, ValueError):
    pass


class DimensionError(SdiophError, ValueError):
    pass


class DomainError(SdiophError, ValueError):
    pass


class DegeneratePairError(SdiophError, ValueError):
    pass


class EmptyWindowError(SdiophError, ValueError):
    pass


class NotALatticeError(SdiophError, ValueError):
    """Raised when the affine matrix is singular."""


class HypothesisError(SdiophError, ValueError):
    """Inputs do not satisfy a lemma's hypotheses (this is not a lemma failure)."""


class SearchTooLargeError(SdiophError, RuntimeError):
    pass


class PrecisionExhaustedError(SdiophError, RuntimeError):
    pass


class RadiusError(SdiophError, ValueError):
    pass


class EmptyBallError(SdiophError, ValueError):
    pass


class FitError(SdiophError, ValueError):
    pass


class ConfigError(SdiophError, ValueError):
    """Malformed experiment configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
