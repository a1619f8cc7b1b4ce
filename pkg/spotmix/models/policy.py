"""Policy configuration, zone bookkeeping and scaling decisions."""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .cluster import ClusterCounts, Replica


class PolicyName(str, Enum):
    SPOTHEDGE = "spothedge"
    EVEN_SPREAD = "even_spread"
    ROUND_ROBIN = "round_robin"
    STATIC_MIXTURE = "static_mixture"
    OD_ONLY = "od_only"


class PolicyConfig(BaseModel):
    """Parameters shared by the online policies and the autoscaler."""
    name: PolicyName = Field(PolicyName.SPOTHEDGE, description="Policy to run")
    n_extra: int = Field(1, ge=0, description="Spot replicas overprovisioned above N_Tar")
    q_tar: float = Field(0.05, gt=0, description="Target requests/sec per replica")
    autoscale_window: int = Field(6, ge=1, description="Ticks averaged into R_t")
    upscale_persistence: int = Field(60, ge=1, description="Ticks N_Can must exceed N_Tar")
    downscale_persistence: int = Field(60, ge=1, description="Ticks N_Can must stay below N_Tar")
    min_replicas: int = Field(1, ge=0, description="Floor for the autoscaled target")
    n_tar_override: Optional[int] = Field(None, ge=0, description="Fixed N_Tar; disables autoscaling")
    initial_n_tar: Optional[int] = Field(None, ge=0, description="N_Tar before the window fills")
    spot_pool: int = Field(4, ge=0, description="static_mixture: spot pool size n_s")
    od_pool: int = Field(1, ge=0, description="static_mixture: on-demand pool size n_o")


class ZoneBook(BaseModel):
    """Z_A / Z_P partition of the enabled zones (ordered, append on move)."""
    model_config = ConfigDict(frozen=True)

    available: Tuple[str, ...]
    preempting: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _partition(self) -> "ZoneBook":
        if set(self.available) & set(self.preempting):
            raise ValueError("a zone cannot be both available and preempting")
        if len(set(self.available)) != len(self.available) or \
                len(set(self.preempting)) != len(self.preempting):
            raise ValueError("zone lists must not repeat a zone")
        return self

    @classmethod
    def initial(cls, zone_ids: List[str]) -> "ZoneBook":
        """Initially all zones are available."""
        return cls(available=tuple(zone_ids), preempting=())

    @property
    def zones(self) -> Tuple[str, ...]:
        return self.available + self.preempting


class ScalingDecision(BaseModel):
    """A policy's output for one tick."""
    spot_launches: List[str] = Field(default_factory=list, description="One zone id per spot launch")
    od_launches: int = Field(0, ge=0)
    terminate: List[int] = Field(default_factory=list, description="Replica ids to terminate")

    @field_validator("terminate")
    @classmethod
    def _unique(cls, ids: List[int]) -> List[int]:
        if len(set(ids)) != len(ids):
            raise ValueError("a replica can be terminated once per decision")
        return ids

    @property
    def empty(self) -> bool:
        return not self.spot_launches and not self.od_launches and not self.terminate


class PolicyContext(BaseModel):
    """What a policy sees when it decides at tick t."""
    t: int
    n_tar: int
    counts: ClusterCounts
    replicas: List[Replica] = Field(default_factory=list, description="Live replicas")
    zone_costs: Dict[str, float] = Field(default_factory=dict)
