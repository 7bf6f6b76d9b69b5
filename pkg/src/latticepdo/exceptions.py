class LatticePDOError(Exception):
    """Base class for errors raised by this package."""


class PreconditionError(LatticePDOError, ValueError):
    """Input violates a documented precondition (bad grid, support, parameters)."""


class AdmissibilityError(PreconditionError):
    """Smoothness exponent ``s`` is outside the window allowed by the index."""


class NumericalError(LatticePDOError, ArithmeticError):
    """A computation finished but failed its own numerical verification."""
