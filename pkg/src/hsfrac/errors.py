"""Exception hierarchy shared by all modules."""


class HsfracError(Exception):
    """Base class for every library error."""


class ParameterError(HsfracError, ValueError):
    """Invalid parameters or indices."""


class PoleError(ParameterError):
    """Gamma function requested at a nonpositive integer."""


class IntegerOrderError(ParameterError):
    """A quantity that only exists for noninteger s was requested with sigma = 1."""


class IndexRangeError(ParameterError):
    """Coefficient or kernel index outside its admissible range."""


class CoincidentPointError(ParameterError):
    """A kernel was evaluated on its diagonal singularity."""


class CenterPointError(ParameterError):
    """An inversion was applied at its center -v."""


class UnsupportedDimensionError(ParameterError):
    """Numerical integration requested in a dimension above 3."""


class ConvergenceError(HsfracError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message, value=float("nan"), err_est=float("inf")):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class SlowDecayError(ParameterError):
    """Improper integral requested for an integrand that does not decay fast enough."""


class DegenerateLadderError(ParameterError):
    """Extrapolation samples are not a usable decreasing ladder."""


class ExtrapolationError(HsfracError, ArithmeticError):
    """A limit ladder did not stabilize."""


class NotInL1sError(ParameterError):
    """Field metadata fails the weighted integrability test for (-Delta)^s."""


class ProximityError(ParameterError):
    """Evaluation point too close to a declared kink of the field."""
