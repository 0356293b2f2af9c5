"""Exception types shared across the toolkit.

All failures raised by this package derive from :class:`SwkbError`, so
callers can catch one base class at CLI or study level.
"""


class SwkbError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SwkbError):
    """Malformed or inconsistent configuration input."""


# -- potential / window -------------------------------------------------

class NonPositiveGap(SwkbError):
    """E - V is not bounded away from zero on the domain."""


class NotIncreasing(SwkbError):
    """The potential x**gamma * W(x) fails to be nondecreasing."""


class NonPositiveW(SwkbError):
    """W takes a non-positive value on [0, b]."""


class OutOfDomain(SwkbError):
    """Evaluation point outside the admissible interval."""


class QuadratureFailure(SwkbError):
    """Adaptive quadrature could not certify the requested tolerance."""


# -- lattice expansions --------------------------------------------------

class GammaMismatch(SwkbError):
    """Arithmetic between expansions living on different exponent lattices."""


class NonPositiveEnergy(SwkbError):
    """A power of (E - V) was requested with E <= 0."""


class ExponentMinusOne(SwkbError):
    """Termwise antidifferentiation hit the exponent -1."""


# -- outer quasimodes ----------------------------------------------------

class RepresentationMismatch(SwkbError):
    """Spectral and series amplitude representations disagree at crossover."""


class DifferentiationUnstable(SwkbError):
    """Estimated roundoff floor dominates a repeated Chebyshev derivative."""


# -- turning-region solver ------------------------------------------------

class ContractionFailure(SwkbError):
    """Empirical Volterra operator norm is not below 1/2."""


class GridTooCoarse(SwkbError):
    """Richardson half-step check disagrees beyond tolerance."""


class TaylorOrderInsufficient(SwkbError):
    """Not enough Taylor coefficients of W for the requested order."""


# -- matching ------------------------------------------------------------

class IllConditionedBasis(SwkbError):
    """A 2x2 change-of-basis system has condition number above 1e8."""


class ToleranceExceeded(SwkbError):
    """A certified bound was violated (imaginary defect, fit residual, ...)."""


class RankDeficient(SwkbError):
    """Least-squares design matrix is numerically rank deficient."""


# -- spectral ------------------------------------------------------------

class BracketLost(SwkbError):
    """Root bracketing failed even after one grid refinement."""


class AlignmentFailure(SwkbError):
    """Eigenvalue index assignment was ambiguous."""


# -- oracle ---------------------------------------------------------------

class StepUnderflow(SwkbError):
    """Adaptive integrator step collapsed below the resolvable scale."""


class ToleranceNotMet(SwkbError):
    """Integrator exhausted its step budget before reaching the target."""
