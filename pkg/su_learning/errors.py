"""
Error hierarchy for SU learning
Every error carries the exit code the command-line surface reports for it
"""

from typing import Optional


class SULearningError(Exception):
    """Base class for all library errors"""
    exit_code: int = 1


class DataError(SULearningError, ValueError):
    """Input data or configuration cannot be used"""
    exit_code = 2


class DataFormatError(DataError):
    """Malformed input text"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyInputError(DataError):
    pass


class InsufficientDataError(DataError):
    """Not enough points of some class (or fold) for the requested sample"""

    def __init__(self, message: str, deficient_class: Optional[int] = None):
        self.deficient_class = deficient_class
        super().__init__(message)


class InvalidPriorError(DataError):
    pass


class DegeneratePriorError(DataError):
    """The SU estimator is undefined when the class prior is one half"""


class NumericalError(SULearningError, RuntimeError):
    """A numerical routine failed"""
    exit_code = 3


class NotPositiveDefiniteError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class SolverError(NumericalError):
    """The QP solver did not report an optimal solution"""

    def __init__(self, message: str, status: Optional[str] = None):
        self.status = status
        super().__init__(message if status is None else f"{message} (status={status})")


class DivergenceError(NumericalError):
    pass


class DegenerateKernelError(NumericalError):
    pass
