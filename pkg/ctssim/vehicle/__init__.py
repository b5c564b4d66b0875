"""Vehicle plant models."""

from ctssim.vehicle.kinematic import InvalidTimestepError, VehicleParams, VehicleState, step

__all__ = ["InvalidTimestepError", "VehicleParams", "VehicleState", "step"]
