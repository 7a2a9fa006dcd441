"""Exception hierarchy.

Input problems derive from ``ValueError``; numerical breakdowns derive from
``ArithmeticError``. The CLI maps the two families to different exit codes.
"""


class QuasiFreeError(Exception):
    """Base class for every error raised by this package."""


class StructureError(QuasiFreeError, ValueError):
    """Matrix is not Hermitian, has the wrong shape, or breaks the CCR diagonal."""


class InvalidStep(QuasiFreeError, ValueError):
    """Non-positive integration step."""


class ZeroLambda(QuasiFreeError, ValueError):
    """The squeezing-noise coefficient vanishes, so the worst phase is undefined."""


class NotApplicable(QuasiFreeError, ValueError):
    """Scenario precondition fails (e.g. slippage demo requested for CP parameters)."""


class NoNegativeDirection(QuasiFreeError, ValueError):
    """The noise matrix B is positive semidefinite; there is no escaping direction."""


class NotPSD(QuasiFreeError, ArithmeticError):
    """Matrix has an eigenvalue below the positivity tolerance."""


class Singular(QuasiFreeError, ArithmeticError):
    """Matrix is (numerically) not invertible."""


class ConvergenceError(QuasiFreeError, ArithmeticError):
    """Iterative eigensolver did not converge."""
