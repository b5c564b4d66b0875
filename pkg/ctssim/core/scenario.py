"""Scenario definition and construction from configuration."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ctssim.control.controller import (
    DEFAULT_CORRIDOR_HALFWIDTH,
    DEFAULT_RESUME_DELAY,
    DEFAULT_SENSE_RANGE,
    DEFAULT_STEER_PREVIEW_TIME,
    ControllerGains,
)
from ctssim.core.config import ConfigurationError, SimConfig
from ctssim.core.map_model import MapDocument, MapGraph, load_map
from ctssim.planning.local_planner import (
    COMFORT_LEVELS,
    DEFAULT_CORNER_OFFSET,
    DEFAULT_MAX_SEGMENT_LENGTH,
    DEFAULT_SAMPLE_SPACING,
    ComfortLevel,
)
from ctssim.planning.stop_scheduler import (
    DEFAULT_ARRIVAL_RADIUS,
    DEFAULT_ARRIVAL_SPEED,
    DEFAULT_LOCAL_DISTANCE,
)
from ctssim.utils.geometry import Point
from ctssim.utils.logger import get_logger
from ctssim.utils.validators import (
    ValidationError,
    validate_comfort,
    validate_point,
    validate_positive,
)
from ctssim.vehicle.kinematic import VehicleParams

logger = get_logger("ctssim.scenario")

DEFAULT_DT = 0.02
DEFAULT_HORIZON = 50.0
DEFAULT_MAX_SIM_TIME = 600.0
DEFAULT_V_CRUISE = 3.0
MAX_DT = 0.1


@dataclass(frozen=True)
class PlannerSettings:
    corner_offset: float = DEFAULT_CORNER_OFFSET
    sample_spacing: float = DEFAULT_SAMPLE_SPACING
    max_segment_length: float = DEFAULT_MAX_SEGMENT_LENGTH


@dataclass(frozen=True)
class StopSettings:
    arrival_radius: float = DEFAULT_ARRIVAL_RADIUS
    arrival_speed: float = DEFAULT_ARRIVAL_SPEED
    local_distance: float = DEFAULT_LOCAL_DISTANCE


@dataclass(frozen=True)
class EmergencySettings:
    sense_range: float = DEFAULT_SENSE_RANGE
    corridor_halfwidth: float = DEFAULT_CORRIDOR_HALFWIDTH
    resume_delay: float = DEFAULT_RESUME_DELAY


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs."""

    document: MapDocument
    start: Point
    goal: Point
    comfort: ComfortLevel = field(
        default_factory=lambda: ComfortLevel.from_name("normal")
    )
    v_cruise: float = DEFAULT_V_CRUISE
    gains: ControllerGains = field(default_factory=ControllerGains)
    params: VehicleParams = field(default_factory=VehicleParams)
    dt: float = DEFAULT_DT
    horizon: float = DEFAULT_HORIZON
    max_sim_time: float = DEFAULT_MAX_SIM_TIME
    name: str = "scenario"
    initial_speed: float = 0.0
    initial_heading: float | None = None
    steer_preview_time: float = DEFAULT_STEER_PREVIEW_TIME
    planner: PlannerSettings = field(default_factory=PlannerSettings)
    stops: StopSettings = field(default_factory=StopSettings)
    emergency: EmergencySettings = field(default_factory=EmergencySettings)

    def __post_init__(self) -> None:
        try:
            for name in ("dt", "horizon", "max_sim_time", "v_cruise"):
                validate_positive(name, getattr(self, name))
            validate_positive("initial_speed", self.initial_speed, allow_zero=True)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e
        if self.dt > MAX_DT:
            raise ConfigurationError(f"dt must be in (0, {MAX_DT}], got {self.dt}")
        if self.initial_speed > self.params.v_max:
            raise ConfigurationError(
                f"initial_speed must be in [0, {self.params.v_max}], got {self.initial_speed}"
            )

    @property
    def map(self) -> MapGraph:
        """Road network of the scenario."""
        return self.document.graph


def _point(value: Any, what: str) -> Point:
    if value is None:
        raise ConfigurationError(f"Scenario {what} point is required")
    try:
        return validate_point(value)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid {what} point: {e}") from e


def build_scenario(
    config: SimConfig,
    map_path: str | Path | None = None,
    start: Any = None,
    goal: Any = None,
    **overrides: Any,
) -> Scenario:
    """
    Assemble a Scenario from configuration and command-line overrides.

    Args:
        config: Scenario configuration (may be empty)
        map_path: Map file; defaults to ``scenario.map`` resolved against the
            configuration file
        start: Start point ("x,y" or a pair); defaults to ``scenario.start``
        goal: Goal point; defaults to ``scenario.goal``
        **overrides: ``comfort``, ``v_cruise``, ``dt``, ``horizon`` or
            ``max_sim_time`` values that take precedence over the config

    Returns:
        Validated Scenario

    Raises:
        ConfigurationError: Missing or invalid settings
        FileNotFoundError: If the map file does not exist
        MapSyntaxError, MapSemanticError: If the map is invalid
    """
    overrides = {k: v for k, v in overrides.items() if v is not None}

    if map_path is None:
        configured = config.get("scenario.map")
        if configured is None:
            raise ConfigurationError("No map given (use --map or scenario.map)")
        map_path = config.resolve_path(configured)
    document = load_map(map_path)

    table = {**COMFORT_LEVELS, **(config.get("planner.comfort_levels") or {})}
    comfort_name = overrides.get("comfort", config.get("scenario.comfort", "normal"))
    try:
        comfort = ComfortLevel.from_name(validate_comfort(comfort_name), table)
    except (ValidationError, KeyError, ValueError) as e:
        raise ConfigurationError(f"Invalid comfort level '{comfort_name}': {e}") from e

    def number(key: str, default: float) -> float:
        if key in overrides:
            return float(overrides[key])
        return config.get_float(f"scenario.{key}", default)

    heading = config.get("scenario.initial_heading")
    try:
        gains = ControllerGains(
            alpha1=config.get_float("controller.alpha1", ControllerGains.alpha1),
            alpha2=config.get_float("controller.alpha2", ControllerGains.alpha2),
            alpha3=config.get_float("controller.alpha3", ControllerGains.alpha3),
            k_v=config.get_float("controller.k_v", ControllerGains.k_v),
        )
    except ValueError as e:
        raise ConfigurationError(f"Invalid controller gains: {e}") from e

    scenario = Scenario(
        document=document,
        start=_point(config.get("scenario.start") if start is None else start, "start"),
        goal=_point(config.get("scenario.goal") if goal is None else goal, "goal"),
        comfort=comfort,
        v_cruise=number("v_cruise", DEFAULT_V_CRUISE),
        gains=gains,
        params=config.get_section("vehicle", VehicleParams),
        dt=number("dt", DEFAULT_DT),
        horizon=number("horizon", DEFAULT_HORIZON),
        max_sim_time=number("max_sim_time", DEFAULT_MAX_SIM_TIME),
        name=str(config.get("scenario.name", Path(map_path).stem)),
        initial_speed=number("initial_speed", 0.0),
        initial_heading=(
            None if heading is None else config.get_float("scenario.initial_heading", 0.0)
        ),
        steer_preview_time=config.get_float(
            "controller.steer_preview_time", DEFAULT_STEER_PREVIEW_TIME
        ),
        planner=config.get_section("planner", PlannerSettings, ignore=("comfort_levels",)),
        stops=config.get_section("stops", StopSettings),
        emergency=config.get_section("emergency", EmergencySettings),
    )
    logger.debug(
        f"Scenario '{scenario.name}': start={scenario.start} goal={scenario.goal} "
        f"comfort={comfort.level} v_cruise={scenario.v_cruise} dt={scenario.dt}"
    )
    return scenario
