"""Utility functions and classes."""

from ctssim.utils.logger import get_logger, setup_logging
from ctssim.utils.validators import (
    validate_comfort,
    validate_path,
    validate_point,
    validate_positive,
)

__all__ = [
    "get_logger",
    "setup_logging",
    "validate_comfort",
    "validate_path",
    "validate_point",
    "validate_positive",
]
