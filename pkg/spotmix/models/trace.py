"""Spot-capacity trace models."""

from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import TraceValidationError, ZoneLookupError


class Zone(BaseModel):
    """One failure domain with its static per-tick unit costs."""
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Zone identifier, e.g. 'aws:us-east-2a'")
    region: str = Field(..., description="Region the zone belongs to")
    cloud: str = Field(..., description="Cloud provider")
    spot_unit_cost: float = Field(..., gt=0, description="Spot cost per replica per tick")
    od_unit_cost: float = Field(..., gt=0, description="On-demand cost per replica per tick")

    @model_validator(mode="after")
    def _spot_cheaper(self) -> "Zone":
        if not self.spot_unit_cost < self.od_unit_cost:
            raise ValueError(
                f"zone {self.id}: spot_unit_cost must be below od_unit_cost"
            )
        return self


class CapacityTrace(BaseModel):
    """Per-zone launchable spot capacity C(z,t) over a tick horizon.

    `capacity` is a read-only int array of shape (len(zones), horizon); row i
    belongs to zones[i].
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    zones: List[Zone]
    horizon: int = Field(..., ge=1)
    tick_seconds: int = Field(10, gt=0)
    capacity: np.ndarray
    name: str = Field("trace", description="Label carried into reports")

    @field_validator("capacity", mode="before")
    @classmethod
    def _as_int_array(cls, value) -> np.ndarray:
        return np.array(value, dtype=np.int64)

    @model_validator(mode="after")
    def _check_shape(self) -> "CapacityTrace":
        if not self.zones:
            raise TraceValidationError("trace has no zones")
        ids = [zone.id for zone in self.zones]
        if len(set(ids)) != len(ids):
            raise TraceValidationError("zone ids must be unique within a trace")
        if self.capacity.shape != (len(self.zones), self.horizon):
            raise TraceValidationError(
                f"capacity shape {self.capacity.shape} does not match "
                f"({len(self.zones)}, {self.horizon})"
            )
        if (self.capacity < 0).any():
            raise TraceValidationError("capacity must be non-negative")
        self.capacity.setflags(write=False)
        return self

    @property
    def zone_ids(self) -> List[str]:
        return [zone.id for zone in self.zones]

    def zone_index(self, zone_id: str) -> int:
        """Row of `zone_id` in the capacity array."""
        for index, zone in enumerate(self.zones):
            if zone.id == zone_id:
                return index
        raise ZoneLookupError(f"unknown zone '{zone_id}'")

    def zone(self, zone_id: str) -> Zone:
        return self.zones[self.zone_index(zone_id)]

    def capacity_at(self, zone_id: str, t: int) -> int:
        """C(z,t)."""
        row = self.zone_index(zone_id)
        if not 0 <= t < self.horizon:
            raise ZoneLookupError(f"tick {t} outside horizon [0, {self.horizon})")
        return int(self.capacity[row, t])

    def availability_fraction(self, zone_ids: Iterable[str], need: int) -> float:
        """Fraction of ticks where the summed capacity of `zone_ids` reaches `need`."""
        if need <= 0:
            raise TraceValidationError("need must be positive")
        rows = sorted({self.zone_index(zone_id) for zone_id in zone_ids})
        if not rows:
            raise TraceValidationError("zone set must not be empty")
        total = self.capacity[rows, :].sum(axis=0)
        return float(np.count_nonzero(total >= need)) / self.horizon

    def spot_costs(self) -> Dict[str, float]:
        return {zone.id: zone.spot_unit_cost for zone in self.zones}


class PoissonZoneModel(BaseModel):
    """Generator parameters for one zone: preemption rate λ and mean capacity."""
    model_config = ConfigDict(populate_by_name=True)

    id: str = Field(..., description="Zone identifier")
    region: str = Field(..., description="Region the zone belongs to")
    cloud: str = Field("aws", description="Cloud provider")
    spot_unit_cost: float = Field(1.0, gt=0, description="Spot cost per replica per tick")
    rate: float = Field(0.0, alias="lambda", ge=0, description="Preemption events per tick")
    mean_capacity: int = Field(..., ge=0, description="Capacity the zone regenerates toward")
    unavailability_episodes: List[Tuple[int, int]] = Field(
        default_factory=list,
        description="(start, end) tick ranges with C(z,t)=0, end exclusive"
    )

    @field_validator("unavailability_episodes")
    @classmethod
    def _episodes_disjoint(cls, episodes: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        ordered = sorted(episodes)
        for start, end in ordered:
            if start < 0 or end <= start:
                raise ValueError(f"episode ({start}, {end}) is empty or negative")
        for (_, end), (start, _) in zip(ordered, ordered[1:]):
            if start < end:
                raise ValueError("unavailability episodes overlap")
        return ordered

    def episode_mask(self, horizon: int) -> np.ndarray:
        """Boolean mask of ticks forced to zero capacity."""
        mask = np.zeros(horizon, dtype=bool)
        for start, end in self.unavailability_episodes:
            if end > horizon:
                raise TraceValidationError(
                    f"zone {self.id}: episode ({start}, {end}) exceeds horizon {horizon}"
                )
            mask[start:end] = True
        return mask


class TraceEventRecord(BaseModel):
    """One step-function change in the on-disk trace format."""
    t: int
    zone: str
    capacity: int


class TraceFileHeader(BaseModel):
    """On-disk trace document."""
    tick_seconds: int = Field(10, gt=0)
    horizon: int = Field(..., ge=1)
    zones: List[Zone]
    events: List[TraceEventRecord] = Field(default_factory=list)
    name: Optional[str] = None
