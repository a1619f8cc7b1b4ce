"""Replica lifecycle, event log and billing models."""

from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, Field


class ReplicaKind(str, Enum):
    """Purchase option of the instance hosting a replica."""
    SPOT = "spot"
    ON_DEMAND = "on_demand"


class ReplicaState(str, Enum):
    """Lifecycle state; provisioning covers launch plus model load."""
    PROVISIONING = "provisioning"
    READY = "ready"
    TERMINATED = "terminated"
    PREEMPTED = "preempted"


class EventKind(str, Enum):
    LAUNCHED = "launched"
    LAUNCH_FAILED = "launch_failed"
    BECAME_READY = "became_ready"
    PREEMPTED = "preempted"
    TERMINATED = "terminated"


class Replica(BaseModel):
    """One model replica on one instance."""
    id: int
    kind: ReplicaKind
    zone: str
    state: ReplicaState = ReplicaState.PROVISIONING
    launched_at: int = Field(..., ge=0, description="Tick of the launch request")
    ready_at: Optional[int] = Field(None, description="Tick the replica became ready")
    ended_at: Optional[int] = Field(None, description="Tick of preemption or termination")

    @property
    def live(self) -> bool:
        return self.state in (ReplicaState.PROVISIONING, ReplicaState.READY)

    @property
    def ready(self) -> bool:
        return self.state == ReplicaState.READY


class Event(BaseModel):
    """One line of the exported event log."""
    t: int
    event: EventKind
    replica: Optional[int] = None
    zone: str
    kind: ReplicaKind


class ClusterCounts(BaseModel):
    """S(t), S_r(t), O(t), O_r(t) and per-zone S(z,t)."""
    spot: int = 0
    spot_ready: int = 0
    on_demand: int = 0
    on_demand_ready: int = 0
    per_zone: Dict[str, int] = Field(default_factory=dict)

    @property
    def ready_total(self) -> int:
        return self.spot_ready + self.on_demand_ready


class BillingLedger(BaseModel):
    """Accumulated cost; provisioning time is billed like ready time."""
    spot_cost: float = 0.0
    od_cost: float = 0.0
    per_zone: Dict[str, float] = Field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.spot_cost + self.od_cost
