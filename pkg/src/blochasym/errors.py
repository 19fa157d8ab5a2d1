"""Exception and warning classes raised across the package."""


class BlochAsymError(Exception):
    """Base class for all package errors."""


class SingularBasis(BlochAsymError):
    pass


class BallTooLarge(BlochAsymError):
    pass


class SymmetryConflict(BlochAsymError):
    pass


class ZeroModeSupplied(BlochAsymError):
    pass


class BasisTooLarge(BlochAsymError):
    pass


class DiagonalizationFailure(BlochAsymError):
    pass


class NearDegenerate(BlochAsymError):
    pass


class FullResonance(BlochAsymError):
    pass


class DivergenceDetected(BlochAsymError):
    pass


class BlockTooLarge(BlochAsymError):
    pass


class NoOracleMatch(BlochAsymError):
    pass


class NoBracket(BlochAsymError):
    pass


class TrackingLost(BlochAsymError):
    pass


class ExhaustedTries(BlochAsymError):
    """No coverage witness was found; ``diagnostics`` holds per-stage drop counts."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NonPositiveValue(BlochAsymError):
    pass


class ConfigParse(BlochAsymError):
    pass


class SmoothnessTooLow(UserWarning):
    """s is below s0; exponents are still evaluated."""


class SmallDenominator(UserWarning):
    """A perturbation denominator fell below the iterability floor."""
