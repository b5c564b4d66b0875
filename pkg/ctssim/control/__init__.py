"""Lateral and longitudinal path-tracking control."""

from ctssim.control.controller import (
    ControlCommand,
    ControlErrors,
    ControllerGains,
    EmergencyLatch,
    PathTracker,
    compute_errors,
    emergency_check,
    lateral_control,
    longitudinal_control,
)

__all__ = [
    "ControlCommand",
    "ControlErrors",
    "ControllerGains",
    "EmergencyLatch",
    "PathTracker",
    "compute_errors",
    "emergency_check",
    "lateral_control",
    "longitudinal_control",
]
