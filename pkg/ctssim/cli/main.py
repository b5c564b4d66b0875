"""Command-line interface for ctssim."""

import logging
import sys
from pathlib import Path

import click

from ctssim.cli.helpers import (
    EXIT_CONFIG,
    EXIT_NO_ROUTE,
    EXIT_NOT_COMPLETED,
    display_map_summary,
    display_metrics,
    load_scenario_config,
    print_error,
    print_success,
    print_version,
)
from ctssim.core.config import ConfigurationError
from ctssim.core.harness import Simulation
from ctssim.core.map_model import MapSemanticError, MapSyntaxError, load_map
from ctssim.core.scenario import build_scenario
from ctssim.core.trace import TraceIOError, emit_trace, write_metrics_json
from ctssim.planning.global_planner import NoRouteError
from ctssim.planning.local_planner import DegenerateGeometryError
from ctssim.utils.logger import setup_logging
from ctssim.utils.validators import COMFORT_LEVELS, ValidationError, validate_path

INPUT_ERRORS = (
    ConfigurationError,
    ValidationError,
    MapSyntaxError,
    MapSemanticError,
    DegenerateGeometryError,
    FileNotFoundError,
)


class SimGroup(click.Group):
    """Click group whose usage errors exit with status 1."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_CONFIG)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_CONFIG)


# Global options
@click.group(cls=SimGroup)
@click.option(
    "--version",
    is_flag=True,
    is_eager=True,
    expose_value=False,
    callback=lambda ctx, param, value: (print_version(), ctx.exit(0)) if value else None,
    help="Show version and exit",
)
@click.option(
    "--verbose",
    "-v",
    count=True,
    help="Increase verbosity (can be used multiple times)",
)
@click.option(
    "--config",
    "-c",
    type=click.Path(exists=True, dir_okay=False),
    help="Path to scenario configuration file",
)
@click.pass_context
def cli(ctx, verbose, config):
    """
    ctssim - Stop-point scheduling simulator for automated shuttles.

    Plan a route over a road map, follow it with a curvature controller and
    hold at pre-programmed stop points.
    """
    ctx.ensure_object(dict)

    # Setup logging based on verbosity
    if verbose == 0:
        log_level = logging.WARNING
    elif verbose == 1:
        log_level = logging.INFO
    else:
        log_level = logging.DEBUG

    setup_logging(level=log_level)

    ctx.obj["config_path"] = config
    ctx.obj["verbose"] = verbose


@cli.command()
@click.option("--map", "map_path", type=click.Path(dir_okay=False), help="Map file")
@click.option("--start", help="Start point as x,y")
@click.option("--goal", help="Goal point as x,y")
@click.option("--comfort", type=click.Choice(COMFORT_LEVELS), help="Comfort level")
@click.option("--v-cruise", type=float, help="Cruise speed in m/s")
@click.option("--dt", type=float, help="Control period in seconds")
@click.option("--horizon", type=float, help="Horizon of view in meters")
@click.option("--max-time", type=float, help="Maximum simulated time in seconds")
@click.option(
    "--trace", "trace_path", type=click.Path(dir_okay=False), help="CSV trace output"
)
@click.option(
    "--plot", "plot_path", type=click.Path(dir_okay=False), help="SVG plot output"
)
@click.option(
    "--metrics",
    "metrics_path",
    type=click.Path(dir_okay=False),
    help="JSON metrics output",
)
@click.pass_context
def run(
    ctx,
    map_path,
    start,
    goal,
    comfort,
    v_cruise,
    dt,
    horizon,
    max_time,
    trace_path,
    plot_path,
    metrics_path,
):
    """
    Run a scenario.

    Every option may come from the scenario file given with --config;
    command-line values take precedence.

    Examples:
        ctssim run --map configs/maps/straight.map --start 0,0 --goal 100,0

        ctssim -c configs/scenarios/inria_itinerary.yaml run --trace out.csv
    """
    try:
        config = load_scenario_config(ctx.obj.get("config_path"))
        if map_path is not None:
            map_path = validate_path(map_path, must_exist=True)
        scenario = build_scenario(
            config,
            map_path=map_path,
            start=start,
            goal=goal,
            comfort=comfort,
            v_cruise=v_cruise,
            dt=dt,
            horizon=horizon,
            max_sim_time=max_time,
        )
        result = Simulation(scenario).run()
    except NoRouteError as e:
        print_error(f"No route: {e}", EXIT_NO_ROUTE)
    except INPUT_ERRORS as e:
        print_error(str(e), EXIT_CONFIG)

    try:
        if trace_path:
            emit_trace(result.trace, Path(trace_path), "csv")
        if plot_path:
            emit_trace(result.trace, Path(plot_path), "svg", result.trajectory)
        if metrics_path:
            write_metrics_json(result.metrics, Path(metrics_path))
    except TraceIOError as e:
        print_error(str(e), EXIT_CONFIG)

    display_metrics(result.metrics, scenario.name)
    if not result.metrics.route_completed:
        print_error(
            f"Route not completed within {scenario.max_sim_time:g} s", EXIT_NOT_COMPLETED
        )
    print_success(f"Route completed in {result.metrics.sim_time:.2f} s")


@cli.command()
@click.option("--map", "map_path", type=click.Path(dir_okay=False), help="Map file")
@click.pass_context
def validate(ctx, map_path):
    """
    Validate a map file and/or the scenario configuration.

    Examples:
        ctssim validate --map configs/maps/inria_itinerary.map

        ctssim -c configs/scenarios/leon_uturn.yaml validate
    """
    config_path = ctx.obj.get("config_path")
    if map_path is None and config_path is None:
        raise click.UsageError("Nothing to validate: give --map and/or --config")

    if config_path is not None:
        try:
            config = load_scenario_config(config_path)
        except ConfigurationError as e:
            print_error(f"Configuration validation failed: {e}")
        print_success(f"Configuration valid: {config_path}")
        if map_path is None and config.get("scenario.map"):
            map_path = config.resolve_path(config.get("scenario.map"))

    if map_path is not None:
        try:
            path = validate_path(map_path, must_exist=True)
            document = load_map(path)
        except (ValidationError, MapSyntaxError, MapSemanticError, OSError) as e:
            print_error(f"Map validation failed: {e}")
        display_map_summary(document, path)
        print_success(f"Map valid: {path}")


if __name__ == "__main__":
    cli()
