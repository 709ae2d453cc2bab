import json
from pathlib import Path
from typing import Any, Callable

import pytest

from firefilter.utils.models import Grid


@pytest.fixture
def grid() -> Grid:
    """40 x 40 m at 0.5 m cells."""
    return Grid(nx=80, ny=80, dx=0.5, dy=0.5)


@pytest.fixture
def run_config() -> dict[str, Any]:
    """Config mapping for quick end-to-end runs."""
    return {
        "grid": {"nx": 100, "ny": 60, "dx": 0.5, "dy": 0.5},
        "ignition": {"center": [15.0, 15.0], "radius": 2.0},
        "params": {"beta": 0.1, "gamma": 0.15},
        "filter": {"n_particles": 8, "n_members": 4, "n_member_contours": 3},
        "t_end": 30.0,
        "obs_interval": 10.0,
    }


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    def write(data: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return write

