from pathlib import Path
from typing import Union

from sympy import isprime

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2
EXIT_BUDGET = 3


class IsotowerError(Exception):
    """Base class for all errors raised by isotower."""

    exit_code = EXIT_VALIDATION


class ValidationError(IsotowerError):
    """Raised when input validation fails."""

    exit_code = EXIT_VALIDATION


class VerificationError(IsotowerError):
    """Raised when a structural check on a built object fails."""

    exit_code = EXIT_VERIFICATION


class BudgetExceededError(IsotowerError):
    """Raised when a computation would exceed a configured size budget."""

    exit_code = EXIT_BUDGET


class FieldTooSmallError(IsotowerError):
    """Raised when the working field lacks a root the caller asked for."""

    exit_code = EXIT_BUDGET


class InconsistentStructureError(IsotowerError):
    """Raised when an internal invariant does not hold."""

    exit_code = EXIT_VERIFICATION


def validate_prime(value: int, name: str, minimum: int = 2) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum or not isprime(value):
        raise ValidationError(f"{name} must be a prime >= {minimum}, got {value}")
    return value


def validate_positive(value: int, name: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


def validate_output_path(path: Union[str, Path]) -> Path:
    path = Path(path).resolve()

    if not path.parent.exists():
        raise ValidationError(f"Output directory does not exist: {path.parent}")
    if path.exists() and path.is_dir():
        raise ValidationError(f"Output path is a directory: {path}")

    return path


def check_budget(size: int, limit: int, what: str) -> None:
    if size > limit:
        raise BudgetExceededError(f"{what} too large: {size} > {limit}")
