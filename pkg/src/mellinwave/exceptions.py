"""Exception hierarchy.

Every error carries a short machine-readable ``reason`` and the process exit
code the command-line front end maps it to (2: invalid input or
configuration, 3: numerical failure such as divergence or inadmissibility).
"""


class MellinWaveError(Exception):
    reason = "error"
    exit_code = 1


class ValidationError(MellinWaveError, ValueError):
    reason = "validation"
    exit_code = 2


class ParameterError(ValidationError):
    reason = "parameter"


class LengthError(ValidationError):
    reason = "length"


class DomainError(ValidationError):
    reason = "domain"


class GridError(ValidationError):
    reason = "grid"


class ParseError(ValidationError):
    reason = "parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(MellinWaveError, ArithmeticError):
    reason = "numerical"
    exit_code = 3


class MellinDivergenceError(NumericalError):
    """A Mellin-type integral does not converge at one end of the scale axis."""

    reason = "divergence"

    def __init__(self, message, end=None):
        super().__init__(message)
        self.end = end


class ContourError(NumericalError):
    reason = "contour"


class TruncationError(NumericalError):
    reason = "truncation"


class AdmissibilityError(NumericalError):
    reason = "admissibility"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonPowerLawError(NumericalError):
    reason = "non_power_law"
