"""CLI helper functions and utilities."""

import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

from ctssim import __version__
from ctssim.core.config import SimConfig
from ctssim.core.map_model import MapDocument
from ctssim.core.metrics import MetricsReport

console = Console()

SCHEMA_PATH = (
    Path(__file__).parent.parent.parent / "configs" / "schema" / "scenario.schema.json"
)

EXIT_CONFIG = 1
EXIT_NO_ROUTE = 2
EXIT_NOT_COMPLETED = 3


def print_version():
    """Print version information."""
    console.print(f"[bold]ctssim[/bold] version {__version__}")


def print_error(message: str, exit_code: int = EXIT_CONFIG):
    """Print error message and exit."""
    console.print(f"[bold red]Error:[/bold red] {message}")
    sys.exit(exit_code)


def print_success(message: str):
    """Print success message."""
    console.print(f"[bold green]✓[/bold green] {message}")


def load_scenario_config(config_file: str | Path | None) -> SimConfig:
    """
    Load the scenario configuration, validated against the scenario schema.

    Args:
        config_file: Optional scenario YAML file

    Returns:
        SimConfig (user defaults merged with the scenario file)

    Raises:
        ConfigurationError: If loading or validation fails
    """
    config = SimConfig.load_with_defaults(config_file)
    if config_file and SCHEMA_PATH.exists():
        config.validate(SCHEMA_PATH)
    return config


def display_metrics(report: MetricsReport, name: str):
    """
    Display a metrics report.

    Args:
        report: Metrics of the run
        name: Scenario name used as table title
    """
    title = f"Run Summary: {name}"
    table = Table(title=title, show_header=False, box=None, min_width=len(title))
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column("Value", style="white")

    table.add_row("Route completed", "yes" if report.route_completed else "no")
    table.add_row("Simulated time", f"{report.sim_time:.2f} s")
    table.add_row("Distance travelled", f"{report.distance_travelled:.1f} m")
    table.add_row("Lateral error mean (curves)", f"{report.lateral_error_mean_curves:.3f} m")
    table.add_row("Lateral error max", f"{report.lateral_error_max:.3f} m")
    table.add_row(
        "Heading error range",
        f"[{report.heading_error_min:.3f}, {report.heading_error_max:.3f}] rad",
    )
    table.add_row("Curvature max", f"{report.curvature_max:.3f} 1/m")
    if report.u_turn_extent is not None:
        table.add_row("U-turn extent", f"{report.u_turn_extent:.2f} m")
    console.print(table)

    if not report.stops:
        return
    stops = Table(title="Stops")
    stops.add_column("Stop", style="cyan", no_wrap=True)
    stops.add_column("Arrival [s]", style="white", justify="right")
    stops.add_column("Hold [s]", style="yellow", justify="right")
    stops.add_column("Position error [m]", style="green", justify="right")
    for stop in report.stops:
        stops.add_row(
            stop.stop_id,
            f"{stop.arrival_time:.2f}",
            f"{stop.hold_duration:.2f}",
            f"{stop.position_error:.3f}",
        )
    console.print(stops)


def display_map_summary(document: MapDocument, path: Path):
    """
    Display the contents of a parsed map.

    Args:
        document: Parsed map
        path: Map file
    """
    title = f"Map: {path.name}"
    table = Table(title=title, show_header=False, box=None, min_width=len(title))
    table.add_column("Record", style="cyan", no_wrap=True)
    table.add_column("Count", style="white")
    table.add_row("Nodes", str(len(document.graph.nodes)))
    table.add_row("Edges", str(len(document.graph.edges)))
    table.add_row("Stops", str(len(document.stops)))
    table.add_row("Obstacles", str(len(document.obstacles)))
    console.print(table)
