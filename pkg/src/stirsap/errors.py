"""Exception hierarchy shared by all stirsap modules."""


class StirsapError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(StirsapError, ValueError):
    """Invalid parameters, malformed input, or a violated precondition."""


class SingularityError(StirsapError, ArithmeticError):
    """A formula hit a vanishing denominator."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class BranchAmbiguityError(SingularityError):
    """The gauge phase branch cannot be decided at some grid point."""


class NumericalAccuracyError(StirsapError, ArithmeticError):
    """A numerical result failed an accuracy guard (norm drift, non-Hermitian H)."""


class SearchError(StirsapError, RuntimeError):
    """A bracketing search found no crossing inside its bounds."""

    def __init__(self, message, endpoint_fidelities=None):
        super().__init__(message)
        self.endpoint_fidelities = endpoint_fidelities
