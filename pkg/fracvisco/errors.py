class FracviscoError(Exception):
    """
    Base class of all errors raised by fracvisco.
    """


class ValidationError(FracviscoError, ValueError):
    """
    A parameter, array shape or configuration entry violates the documented
    invariants of the object it is meant to build.
    """


class DomainError(ValidationError):
    """
    A function was called outside of its domain, e.g. a Mittag-Leffler
    argument z > 0 or a kernel evaluated at t < 0.
    """


class PoleArgumentError(DomainError):
    """
    The Gamma function was requested at a non-positive integer.
    """


class SingularKernelError(ValidationError):
    """
    A derivative of a kernel at t = 0 was requested but the kernel is weakly
    singular there (alpha < 1).
    """


class ConfigError(ValidationError):
    """
    The JSON scenario configuration is malformed or incomplete.
    """


class NumericalError(FracviscoError, ArithmeticError):
    """
    A numerical computation failed, e.g. a singular linear system or a
    non-convergent quadrature.
    """


class SingularMatrixError(NumericalError):
    """
    A linear system could not be solved reliably.

    # Attributes
    condition (float): Condition number estimate of the offending matrix
    """

    def __init__(self, message, condition=float('inf')):
        super().__init__(message)
        self.condition = condition


class StepLimitError(NumericalError):
    """
    The requested time grid has more steps than max_steps (settings.MAX_STEPS
    by default).
    """


class QuadratureError(NumericalError):
    """
    An adaptive quadrature did not converge.
    """


class NotTransformableError(NumericalError):
    """
    A load signal has no closed-form Laplace transform (sample tables).
    """


class InversionRangeError(NumericalError):
    """
    A Laplace inversion was requested at a time the fixed Talbot contour cannot
    resolve with at most laplace_oracle.MAX_NODES nodes.
    """
