from typing import Dict

# Error code to HTTP status mapping
ERROR_CODE_MAPPING: Dict[str, int] = {
    # 400 Bad Request
    'UNSUPPORTED_WEIGHT': 400,
    'OUT_OF_DOMAIN': 400,
    'INVALID_MODULUS': 400,
    'NON_PRIMITIVE_CHARACTER': 400,
    'CHECKPOINT_EXCEEDS_REALIZATION': 400,
    'CONFIG_ERROR': 400,

    # 404 Not Found
    'NO_SUCH_CHARACTER': 404,
    'UNKNOWN_BUILTIN': 404,

    # 422 Unprocessable (numerics refused to certify)
    'POLE_AT_NONPOSITIVE_INTEGER': 422,
    'ACCURACY_NOT_ACHIEVABLE': 422,
    'CANNOT_CERTIFY': 422,
    'PARAMETER_DEGENERACY': 422,
    'RECONSTRUCTION_ERROR': 422,
    'NON_CONVERGENCE': 422,
    'INSUFFICIENT_DATA': 422,
    'DEGENERATE_FIT': 422,
}

# Error code to CLI exit status; 1 is reserved for "check beyond tolerance"
EXIT_CODE_MAPPING: Dict[str, int] = {
    'OUT_OF_DOMAIN': 2,
    'UNSUPPORTED_WEIGHT': 2,
    'INVALID_MODULUS': 2,
    'NON_PRIMITIVE_CHARACTER': 2,
    'CHECKPOINT_EXCEEDS_REALIZATION': 2,
    'CONFIG_ERROR': 2,
    'UNKNOWN_BUILTIN': 2,
}

EXIT_CHECK_FAILED = 1
EXIT_NUMERIC_REFUSAL = 3
EXIT_UNEXPECTED = 4


def map_lab_error_to_http(error_message: str) -> tuple[int, str]:
    """
    Map a lab error to an HTTP status code.

    Args:
        error_message: Error text in the form "ERROR_CODE: message"

    Returns:
        Tuple of (status_code, error_message)
    """
    error_code = error_message.split(':')[0].strip() if ':' in error_message else error_message.strip()
    status_code = ERROR_CODE_MAPPING.get(error_code, 500)
    return status_code, error_message


def map_lab_error_to_exit(error_message: str) -> int:
    """Map a lab error to a CLI exit status"""
    error_code = error_message.split(':')[0].strip() if ':' in error_message else error_message.strip()
    if error_code not in ERROR_CODE_MAPPING:
        return EXIT_UNEXPECTED
    return EXIT_CODE_MAPPING.get(error_code, EXIT_NUMERIC_REFUSAL)


class LabError(Exception):
    """Base exception for lab errors; str() renders as "CODE: message"."""

    code = "LAB_ERROR"

    def __init__(self, message: str, **context):
        self.message = message
        self.context = context
        super().__init__(f"{self.code}: {message}")


class PoleError(LabError):
    code = "POLE_AT_NONPOSITIVE_INTEGER"

    def __init__(self, message: str, pole: int | None = None, **context):
        super().__init__(message, pole=pole, **context)
        self.pole = pole


class AccuracyError(LabError):
    code = "ACCURACY_NOT_ACHIEVABLE"


class CannotCertifyError(LabError):
    code = "CANNOT_CERTIFY"


class ParameterDegeneracyError(LabError):
    code = "PARAMETER_DEGENERACY"


class UnsupportedWeightError(LabError):
    code = "UNSUPPORTED_WEIGHT"


class DomainError(LabError):
    code = "OUT_OF_DOMAIN"


class NoSuchCharacterError(LabError):
    code = "NO_SUCH_CHARACTER"


class InvalidModulusError(LabError):
    code = "INVALID_MODULUS"


class NonPrimitiveCharacterError(LabError):
    code = "NON_PRIMITIVE_CHARACTER"


class ReconstructionError(LabError):
    code = "RECONSTRUCTION_ERROR"


class NonConvergenceError(LabError):
    code = "NON_CONVERGENCE"


class InsufficientDataError(LabError):
    code = "INSUFFICIENT_DATA"


class DegenerateFitError(LabError):
    code = "DEGENERATE_FIT"


class RealizationError(LabError):
    code = "CHECKPOINT_EXCEEDS_REALIZATION"


class UnknownBuiltinError(LabError):
    code = "UNKNOWN_BUILTIN"


class ConfigError(LabError):
    """Config-file diagnostic naming the offending line and field"""

    code = "CONFIG_ERROR"

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        text = f"{message} ({', '.join(where)})" if where else message
        super().__init__(text, line=line, field=field)
        self.line = line
        self.field = field
