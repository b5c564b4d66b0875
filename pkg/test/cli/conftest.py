"""CLI-specific fixtures for pytest."""

import pytest
from click.testing import CliRunner


@pytest.fixture
def cli_runner():
    """Click CLI test runner."""
    return CliRunner()


@pytest.fixture
def broken_map_file(tmp_path):
    """Map file with a syntax error on line 2."""
    map_file = tmp_path / "broken.map"
    map_file.write_text("node A 0 0 station\nroad A B\n")
    return map_file


@pytest.fixture
def mock_invalid_config_file(tmp_path):
    """Scenario file that violates the scenario schema."""
    config_file = tmp_path / "invalid.yaml"
    config_file.write_text(
        """scenario:
  map: ../maps/straight.map
  comfort: sporty
  warp_speed: 9
"""
    )
    return config_file


@pytest.fixture
def run_args(short_map_file):
    """Arguments of a quick run on the short straight road."""
    return ["run", "--map", str(short_map_file), "--start", "0,0", "--goal", "20,0"]
