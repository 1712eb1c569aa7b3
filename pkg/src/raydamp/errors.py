"""Exception hierarchy for raydamp."""


class RaydampError(Exception):
    """Base class for all raydamp errors."""


# --- profiles ---------------------------------------------------------------

class ClassViolation(RaydampError):
    """A profile failed one of its class invariants (which one, and where)."""

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y


class NonSymmetric(ClassViolation):
    """Class-S profile requested but u(y) != u(-y)."""


class DegenerateCurvature(RaydampError):
    """m(y) = (u(y)-u(0))/y^2 dropped below tolerance on [0,1]."""


class OutOfRange(RaydampError):
    """Spectral parameter outside the admissible range [u(0), u(1)]."""


# --- rayleigh_core ----------------------------------------------------------

class SingularEvaluation(RaydampError):
    """Quadrature cannot regularize the critical layer for this c and grid."""


class NoConvergence(RaydampError):
    """Picard iteration did not converge; carries the contraction estimate."""

    def __init__(self, message, iterations=None, contraction=None):
        super().__init__(message)
        self.iterations = iterations
        self.contraction = contraction


# --- singular_integrals -----------------------------------------------------

class EndpointTooClose(RaydampError):
    """Evaluation point closer to +-v(1) than the declared endpoint gap."""


class NotEven(RaydampError):
    """Operator requires an even function of the square-root coordinate."""


class NonzeroOrigin(RaydampError):
    """Operator requires g(0) = 0."""


# --- spectral_quantities / kernels -------------------------------------------

class DegenerateBoundary(RaydampError):
    """phi1'(0,c) below tolerance while y_c is not near 0."""


class SpectralDegeneracy(RaydampError):
    """A^2+B^2 (or A2^2+B2^2) below the eigenvalue-proximity threshold."""


# --- evolution ----------------------------------------------------------------

class UnderResolved(RaydampError):
    """Oscillatory quadrature cannot meet the phase budget on this grid."""


class SingularAssembly(RaydampError):
    """Grid conflicts with the critical-layer collar (or matrix assembly failed)."""


class DegenerateSeries(RaydampError):
    """Decay fit requested on a nonpositive or too-short series."""


# --- oracle -------------------------------------------------------------------

class NearSingular(RaydampError):
    """|u(y)-c| below tolerance at a grid node of the BVP solver."""


class StepFailure(RaydampError):
    """Direct time evolution produced non-finite values."""


# --- cli ----------------------------------------------------------------------

class ConfigError(RaydampError):
    """Invalid run configuration; message names the offending field path."""


class MissingRun(RaydampError):
    """Report requested but no prior run artifacts found."""
