"""Capacity trace generation, loading and saving."""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..errors import TraceFormatError, TraceValidationError
from ..models.experiment import GeneratorConfig
from ..models.trace import CapacityTrace, PoissonZoneModel, TraceFileHeader, Zone
from ..rng import substream

logger = logging.getLogger(__name__)


def sample_preemption_events(rate: float, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Per-tick preemption indicator: True with probability 1 - exp(-rate)."""
    probability = -math.expm1(-rate)
    return rng.random(horizon) < probability


class TraceGenerator:
    """Builds CapacityTrace objects from Poisson zone models or trace files."""

    def __init__(self, tick_seconds: int = 10, refill_ticks: int = 30, k: float = 3.0):
        self.tick_seconds = tick_seconds
        self.refill_ticks = refill_ticks
        self.k = k

    def generate(self, models: Sequence[PoissonZoneModel], horizon: int, seed: int,
                 name: str = "generated",
                 region_episodes: Optional[Dict[str, List[Tuple[int, int]]]] = None) -> CapacityTrace:
        """Replay each zone's preemption process into a capacity time series."""
        if horizon < 1:
            raise TraceValidationError("horizon must be at least 1")
        if not models:
            raise TraceValidationError("at least one zone model is required")
        region_episodes = region_episodes or {}

        mean_spot = float(np.mean([model.spot_unit_cost for model in models]))
        zones = [
            Zone(
                id=model.id,
                region=model.region,
                cloud=model.cloud,
                spot_unit_cost=model.spot_unit_cost,
                od_unit_cost=self.k * mean_spot,
            )
            for model in models
        ]

        capacity = np.zeros((len(models), horizon), dtype=np.int64)
        for row, model in enumerate(models):
            rng = substream(seed, "trace", model.id)
            events = sample_preemption_events(model.rate, horizon, rng)
            capacity[row] = self._replay_zone(model.mean_capacity, events)

            # Forced unavailability: zone episodes plus any covering its region
            mask = model.episode_mask(horizon)
            for start, end in region_episodes.get(model.region, []):
                if end > horizon or start < 0 or end <= start:
                    raise TraceValidationError(
                        f"region {model.region}: episode ({start}, {end}) outside horizon {horizon}"
                    )
                mask[start:end] = True
            capacity[row, mask] = 0

        trace = CapacityTrace(
            zones=zones,
            horizon=horizon,
            tick_seconds=self.tick_seconds,
            capacity=capacity,
            name=name,
        )
        logger.info("Generated trace %s: %d zones, %d ticks", name, len(zones), horizon)
        return trace

    def _replay_zone(self, mean_capacity: int, events: np.ndarray) -> np.ndarray:
        """Capacity starts at the mean, drops by one per event, recovers one per refill period."""
        levels = np.empty(len(events), dtype=np.int64)
        level = mean_capacity
        since_change = 0
        for t in range(len(events)):
            if t > 0:
                if events[t] and level > 0:
                    level -= 1
                    since_change = 0
                elif level < mean_capacity:
                    since_change += 1
                    if since_change >= self.refill_ticks:
                        level += 1
                        since_change = 0
            levels[t] = level
        return levels

    def generate_from_config(self, config: GeneratorConfig, seed: int) -> CapacityTrace:
        generator = TraceGenerator(config.tick_seconds, config.refill_ticks, config.k)
        return generator.generate(
            config.zones, config.horizon, seed,
            name=config.name, region_episodes=config.region_episodes,
        )

    def load(self, path: Path) -> CapacityTrace:
        """Read the step-encoded JSON trace format."""
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"{path}: not valid JSON ({e})") from e

        try:
            header = TraceFileHeader.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(part) for part in first["loc"]) or "<root>"
            raise TraceFormatError(f"{path}: invalid record at {where}: {first['msg']}") from e

        if not header.zones:
            raise TraceValidationError(f"{path}: trace has no zones")

        rows = {zone.id: index for index, zone in enumerate(header.zones)}
        changes: Dict[str, List[Tuple[int, int]]] = {zone.id: [] for zone in header.zones}
        last_t = 0
        for index, event in enumerate(header.events):
            label = f"events[{index}]"
            if event.zone not in rows:
                raise TraceFormatError(f"{path}: {label} names unknown zone '{event.zone}'")
            if event.t < last_t:
                raise TraceFormatError(f"{path}: {label} is out of order (t={event.t})")
            if not 0 <= event.t < header.horizon:
                raise TraceFormatError(f"{path}: {label} tick {event.t} outside horizon")
            if event.capacity < 0:
                raise TraceValidationError(f"{path}: {label} has negative capacity {event.capacity}")
            last_t = event.t
            changes[event.zone].append((event.t, event.capacity))

        # Step function: each value holds until the zone's next event
        capacity = np.zeros((len(header.zones), header.horizon), dtype=np.int64)
        for zone_id, points in changes.items():
            row = rows[zone_id]
            for position, (t, value) in enumerate(points):
                end = points[position + 1][0] if position + 1 < len(points) else header.horizon
                capacity[row, t:end] = value

        trace = CapacityTrace(
            zones=header.zones,
            horizon=header.horizon,
            tick_seconds=header.tick_seconds,
            capacity=capacity,
            name=header.name or Path(path).stem,
        )
        logger.info("Loaded trace %s: %d zones, %d ticks", trace.name, len(trace.zones), trace.horizon)
        return trace

    def save(self, trace: CapacityTrace, output_path: Path):
        """Write `trace` in the format read by load(), one event per value change."""
        output_path.parent.mkdir(parents=True, exist_ok=True)

        events = []
        for t in range(trace.horizon):
            for row, zone in enumerate(trace.zones):
                value = int(trace.capacity[row, t])
                if t == 0 or value != int(trace.capacity[row, t - 1]):
                    events.append({"t": t, "zone": zone.id, "capacity": value})

        document = {
            "name": trace.name,
            "tick_seconds": trace.tick_seconds,
            "horizon": trace.horizon,
            "zones": [zone.model_dump(mode="json") for zone in trace.zones],
            "events": events,
        }
        with open(output_path, "w") as f:
            json.dump(document, f, indent=2)
            f.write("\n")


def gen_trace(models: Sequence[PoissonZoneModel], horizon: int, seed: int,
              tick_seconds: int = 10, refill_ticks: int = 30, k: float = 3.0) -> CapacityTrace:
    return TraceGenerator(tick_seconds, refill_ticks, k).generate(models, horizon, seed)


def load_trace(path: Path) -> CapacityTrace:
    return TraceGenerator().load(path)


def save_trace(trace: CapacityTrace, path: Path):
    TraceGenerator().save(trace, Path(path))


def capacity_at(trace: CapacityTrace, zone_id: str, t: int) -> int:
    return trace.capacity_at(zone_id, t)


def availability_fraction(trace: CapacityTrace, zone_ids: Sequence[str], need: int) -> float:
    return trace.availability_fraction(zone_ids, need)
