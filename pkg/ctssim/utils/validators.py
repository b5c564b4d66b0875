"""Input validation utilities for scenario and command-line values."""

import math
from pathlib import Path

COMFORT_LEVELS = ("comfortable", "normal", "aggressive")


class ValidationError(Exception):
    """Exception raised for validation errors."""

    pass


def validate_point(value: str | tuple[float, float] | list[float]) -> tuple[float, float]:
    """
    Validate a planar point given as ``"x,y"`` or a 2-sequence.

    Args:
        value: Point text or sequence

    Returns:
        Point as a float tuple

    Raises:
        ValidationError: If the point is malformed or not finite
    """
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
    elif isinstance(value, (tuple, list)):
        parts = list(value)
    else:
        raise ValidationError(f"Point must be 'x,y' or a pair, got: {value!r}")

    if len(parts) != 2:
        raise ValidationError(f"Point must have exactly two coordinates, got: {value!r}")

    try:
        x, y = float(parts[0]), float(parts[1])
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Invalid point coordinates {value!r}: {e}") from e

    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"Point coordinates must be finite, got: {value!r}")

    return (x, y)


def validate_positive(name: str, value: float, allow_zero: bool = False) -> float:
    """
    Validate a finite positive (or non-negative) number.

    Args:
        name: Parameter name used in the error message
        value: Value to check
        allow_zero: Accept 0 as valid

    Returns:
        Value as float

    Raises:
        ValidationError: If the value is not finite or out of range
    """
    try:
        number = float(value)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name} must be a number, got: {value!r}") from e

    if not math.isfinite(number):
        raise ValidationError(f"{name} must be finite, got: {value!r}")
    if number < 0 or (number == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got: {number}")

    return number


def validate_comfort(level: str) -> str:
    """
    Validate a comfort level name.

    Args:
        level: Comfort level name

    Returns:
        Normalized level name

    Raises:
        ValidationError: If the level is unknown
    """
    if not level or not isinstance(level, str):
        raise ValidationError(f"Comfort level must be a non-empty string, got: {level}")

    level = level.lower().strip()
    if level not in COMFORT_LEVELS:
        raise ValidationError(
            f"Invalid comfort level '{level}'. Valid levels: {', '.join(COMFORT_LEVELS)}"
        )
    return level


def validate_path(path: str | Path, must_exist: bool = False) -> Path:
    """
    Validate file system path.

    Args:
        path: Path to validate
        must_exist: If True, path must exist and be a file

    Returns:
        Validated Path object

    Raises:
        ValidationError: If path validation fails
    """
    if not isinstance(path, Path):
        try:
            path = Path(path)
        except TypeError as e:
            raise ValidationError(f"Invalid path: {e}") from e

    if must_exist and not path.exists():
        raise ValidationError(f"Path does not exist: {path}")

    if must_exist and path.is_dir():
        raise ValidationError(f"Path is a directory, expected a file: {path}")

    return path
