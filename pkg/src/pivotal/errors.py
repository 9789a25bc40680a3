"""Exception hierarchy.

``ValidationError`` subclasses signal bad user input (CLI exit code 2);
``NumericalError`` subclasses signal a failed computation (exit code 3).
"""


class PivotalError(Exception):
    pass


class ValidationError(PivotalError, ValueError):
    pass


class NumericalError(PivotalError, ArithmeticError):
    pass


class NonPositiveProbability(ValidationError):
    pass


class ProbabilityAboveOne(ValidationError):
    pass


class NonIntegerSampleSize(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class CountMismatch(ValidationError):
    pass


class RequiresNAtLeast2(ValidationError):
    pass


class RequiresClusterLayout(ValidationError):
    pass


class EnumerationTooLarge(ValidationError):
    pass


class DegenerateDuel(NumericalError):
    pass


class EmptyClusterSelected(NumericalError):
    pass


class ZeroProbabilityCluster(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DegenerateEigenspace(UserWarning):
    pass
