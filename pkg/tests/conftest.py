"""Shared fixtures for the spotmix test suite."""

from pathlib import Path
from typing import Dict, Sequence

import numpy as np
import pytest

from spotmix.generators.config_generator import ConfigGenerator
from spotmix.models.trace import CapacityTrace, Zone

REPO_ROOT = Path(__file__).resolve().parent.parent
EXPERIMENTS = REPO_ROOT / "experiments"


def make_trace(capacity: Dict[str, Sequence[int]], spot_costs: Dict[str, float] = None,
               k: float = 3.0, tick_seconds: int = 10, name: str = "fixture") -> CapacityTrace:
    """Trace from per-zone capacity rows; zones keep the dict's order."""
    spot_costs = spot_costs or {}
    zones = [
        Zone(
            id=zone_id,
            region=zone_id.rsplit("-", 1)[0] if "-" in zone_id else "region",
            cloud="aws",
            spot_unit_cost=spot_costs.get(zone_id, 1.0),
            od_unit_cost=k,
        )
        for zone_id in capacity
    ]
    rows = np.array([list(row) for row in capacity.values()], dtype=np.int64)
    return CapacityTrace(zones=zones, horizon=rows.shape[1], tick_seconds=tick_seconds,
                         capacity=rows, name=name)


@pytest.fixture
def trace_factory():
    return make_trace


@pytest.fixture
def config_generator():
    return ConfigGenerator()


@pytest.fixture
def experiments_dir() -> Path:
    return EXPERIMENTS


@pytest.fixture
def shift_trace_path() -> Path:
    return EXPERIMENTS / "traces" / "three_zone_shift.json"
