"""Pytest configuration and fixtures."""

from pathlib import Path

import pytest

from ctssim.core.config import SimConfig
from ctssim.core.map_model import parse_map
from ctssim.core.scenario import build_scenario

CONFIGS_DIR = Path(__file__).parent.parent / "configs"


@pytest.fixture
def maps_dir():
    """Directory of the bundled map files."""
    return CONFIGS_DIR / "maps"


@pytest.fixture
def scenarios_dir():
    """Directory of the bundled scenario files."""
    return CONFIGS_DIR / "scenarios"


@pytest.fixture
def load_scenario(scenarios_dir):
    """Build a bundled scenario by name, with optional overrides."""

    def _load(name, **overrides):
        config = SimConfig.from_yaml(scenarios_dir / f"{name}.yaml")
        return build_scenario(config, **overrides)

    return _load


@pytest.fixture
def two_node_map_text():
    """Minimal well-formed map: A(0,0) -> B(10,0)."""
    return """# minimal map
node A 0 0 station
node B 10 0 station
edge A B 10 3
"""


@pytest.fixture
def short_map_file(tmp_path):
    """Short straight road for quick closed-loop runs."""
    map_file = tmp_path / "short.map"
    map_file.write_text(
        "node A 0 0 station\nnode B 20 0 station\nedge A B 20 3\n", encoding="utf-8"
    )
    return map_file


@pytest.fixture
def corner_document():
    """L-shaped route A(0,0) -> B(20,0) -> C(20,20)."""
    return parse_map(
        """node A 0 0 station
node B 20 0 intersection
node C 20 20 station
edge A B 20 3
edge B C 20 3
"""
    )


@pytest.fixture
def short_scenario(short_map_file):
    """Closed-loop scenario on the short straight road."""

    def _build(**overrides):
        return build_scenario(
            SimConfig.from_dict({}),
            map_path=short_map_file,
            start=overrides.pop("start", "0,0"),
            goal=overrides.pop("goal", "20,0"),
            **overrides,
        )

    return _build
