"""Exception hierarchy.

Two broad classes matter for the CLI exit codes: configuration/validation
problems (exit 2) and numerical non-convergence (exit 3).
"""


class Pphi2Error(Exception):
    """Base class for all package errors."""


class ValidationError(Pphi2Error):
    """Bad inputs: configs, parameters, incompatible shapes."""


class NumericalError(Pphi2Error):
    """A numerical procedure failed to converge or certify."""


# -- potential ---------------------------------------------------------------

class NonPositiveMetric(ValidationError):
    """a(x) or c(x) is not strictly positive at a grid node."""


class DerivativeUnavailable(ValidationError):
    """Neither analytic nor finite-difference derivatives can be formed."""


class UnknownFamily(ValidationError):
    """Unknown built-in potential family name."""


class BadParams(ValidationError):
    """Invalid parameters for a built-in potential family."""


class ExpressionError(ValidationError):
    """Arithmetic expression string failed to parse."""


# -- schrodinger1d -----------------------------------------------------------

class GridTooNarrow(ValidationError):
    """A bound state has not decayed at the grid endpoints."""


class SlowDecayProfile(ValidationError):
    """Jost path called on a slowly decaying potential; use the WKB path."""


class IntegratorDiverged(NumericalError):
    """ODE integration step size underflowed or values blew up."""


class InconclusiveResonance(NumericalError):
    """Independent estimates of w(0) disagree beyond tolerance."""


class ZetaTooSmall(ValidationError):
    """|zeta| below the eps floor of the quasiclassical construction."""


class KernelNotContractive(NumericalError):
    """Volterra iteration failed to contract even after enlarging R(eps)."""


class IndefiniteTailSign(ValidationError):
    """Potential tail changes sign arbitrarily far out."""


class NonUnitaryS(NumericalError):
    """Estimated S(k) deviates from unitarity; upstream normalization bug."""


# -- fock --------------------------------------------------------------------

class CutoffExceedsBasis(ValidationError):
    """Momentum cutoff kappa exceeds the eigenbasis k range."""


class DimensionOverflow(ValidationError):
    """Occupation basis larger than the configured hard cap."""


class UnknownMode(ValidationError):
    """Ladder operator requested for a mode not in the mode set."""


class TruncationWarning(UserWarning):
    """Top-band amplitudes are significant: N_max too small for this degree."""


# -- phi2 --------------------------------------------------------------------

class ComplexKernel(NumericalError):
    """Kernel table has a significant imaginary residue (unsymmetrized basis)."""


class QuadratureUnconverged(NumericalError):
    """Doubling quadrature nodes moved the result beyond tolerance."""


class NoFiniteC(NumericalError):
    """No finite constant certified the perturbation bound below the cap."""


class WeightInfiniteOnSupport(ValidationError):
    """Weight M takes the value +inf where the coupling g is positive."""


# -- spectral ----------------------------------------------------------------

class NotConverged(NumericalError):
    """Eigensolver did not converge within the configured iterations."""


class SolveFailed(NumericalError):
    """Inner linear solve stagnated."""
