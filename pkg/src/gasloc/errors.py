"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and the CLI exit
status it maps to (2 validation, 3 runtime/geometry, 4 I/O).
"""


class GaslocError(Exception):
    code = "ERROR"
    exit_status = 3


class DomainError(GaslocError, ValueError):
    """Argument outside the domain of a model."""

    code = "DOMAIN"
    exit_status = 3


class GeometryError(GaslocError):
    """Anchor/target geometry is degenerate for the requested operation."""

    code = "GEOMETRY"
    exit_status = 3


class ObservabilityError(GeometryError):
    code = "OBSERVABILITY"


class ConfigurationError(GaslocError, ValueError):
    """Inconsistent dimensions or settings."""

    code = "CONFIG"
    exit_status = 2


class NumericalError(GaslocError, ArithmeticError):
    code = "NUMERICAL"
    exit_status = 3


class KinematicsError(GaslocError, ValueError):
    code = "KINEMATICS"
    exit_status = 2


class InfeasibleError(GaslocError):
    """No feasible starting point; ``constraint`` names the first violation."""

    code = "INFEASIBLE"
    exit_status = 3

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or f"constraint '{constraint}' violated")


class TleError(GaslocError, ValueError):
    code = "TLE"
    exit_status = 2


class TleFormatError(TleError):
    code = "TLE_FORMAT"


class TleChecksumError(TleError):
    code = "TLE_CHECKSUM"

    def __init__(self, line_number, expected, found):
        self.line_number = line_number
        self.expected = expected
        self.found = found
        super().__init__(
            f"line {line_number}: checksum digit is {found}, computed {expected}"
        )


class TleParseError(TleError):
    code = "TLE_PARSE"

    def __init__(self, line_number, columns, text):
        self.line_number = line_number
        self.columns = columns
        super().__init__(
            f"line {line_number}, columns {columns[0]}-{columns[1]}: "
            f"cannot parse {text!r}"
        )


class ScenarioError(GaslocError, ValueError):
    code = "SCENARIO"
    exit_status = 2


class UnitError(ScenarioError):
    code = "UNIT"
