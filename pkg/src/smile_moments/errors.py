"""Exception types shared across the library."""


class SmileMomentsError(Exception):
    """Base class for all library errors."""


class NonPositiveVariance(SmileMomentsError):
    """A smile model produced total variance <= 0."""


class NonPositiveVol(SmileMomentsError):
    """Total implied volatility is not strictly positive."""


class BracketingFailed(SmileMomentsError):
    """Root bracket expansion never enclosed the target.

    For transform inversion this signals non-surjectivity of the
    interpolated transform at the requested point.
    """


class MaxIterExceeded(SmileMomentsError):
    """Iterative solver hit its iteration cap before converging."""


class DerivativeSingular(SmileMomentsError):
    """The transform slope vanished where its reciprocal is needed."""


class OrderOutOfRange(SmileMomentsError):
    """Requested quadrature order outside the supported range."""


class NonFiniteIntegrand(SmileMomentsError):
    """Integrand returned NaN or infinity at a quadrature node."""


class OutsideConvergenceStrip(SmileMomentsError):
    """Moment order lies outside the provable convergence strip."""


class CdfOutOfRange(SmileMomentsError):
    """Smile-implied CDF left [0, 1]; the input smile admits arbitrage."""


class NegativeDensity(SmileMomentsError):
    """Smile-implied density is negative; butterfly arbitrage."""


class AlphaOnPole(SmileMomentsError):
    """Damping abscissa sits on an integrand pole (alpha in {0, 1})."""


class AlphaOutOfStrip(SmileMomentsError):
    """Damping abscissa outside the certified moment strip."""


class TruncationInsufficient(SmileMomentsError):
    """Fourier integrand still significant at the effective truncation."""


class InsufficientQuotes(SmileMomentsError):
    """Too few market quotes to calibrate."""


class CalibrationDiverged(SmileMomentsError):
    """Calibration hit its iteration cap with a poor fit."""
