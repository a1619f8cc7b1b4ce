"""Run records and evaluation reports."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from .cluster import BillingLedger, Event, Replica
from .workload import RequestOutcome


class TickRecord(BaseModel):
    """Cluster counts after the decision of tick t."""
    t: int
    n_tar: int
    spot: int
    spot_ready: int
    on_demand: int
    on_demand_ready: int
    spot_ready_seen: int = Field(..., description="S_r the policy observed before deciding")
    per_zone: Dict[str, int] = Field(default_factory=dict)

    @property
    def ready_total(self) -> int:
        return self.spot_ready + self.on_demand_ready


class LatencySummary(BaseModel):
    """Nearest-rank latency percentiles in seconds."""
    p50: float = 0.0
    p90: float = 0.0
    p99: float = 0.0
    mean: float = 0.0
    count: int = 0


class SimReport(BaseModel):
    """Scalars of one (policy, trace, seed) run plus its ready-count series."""
    policy: str
    trace: str
    seed: int
    n_extra: int = 0
    cold_start_ticks: int = 0
    availability: float = Field(..., ge=0, le=1)
    cost_total: float
    cost_spot: float
    cost_od: float
    cost_relative_to_od: float
    latency_p50: float = 0.0
    latency_p90: float = 0.0
    latency_p99: float = 0.0
    latency_mean: float = 0.0
    failure_rate: float = Field(0.0, ge=0, le=1)
    requests: int = 0
    preemptions: int = 0
    launch_failures: int = 0
    ticks: int = 0
    ready_series: List[int] = Field(default_factory=list)
    n_tar_series: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self) -> "SimReport":
        if abs(self.cost_total - (self.cost_spot + self.cost_od)) > 1e-6 * max(1.0, self.cost_total):
            raise ValueError("cost_total must equal cost_spot + cost_od")
        if not self.latency_p50 <= self.latency_p90 <= self.latency_p99:
            raise ValueError("latency percentiles must be ordered")
        return self

    def scalars(self) -> Dict[str, object]:
        """Row used by the CSV export."""
        return self.model_dump(exclude={"ready_series", "n_tar_series"})


class AnalysisRow(BaseModel):
    """Closed-form vs Monte Carlo expected preemption count for one policy."""
    policy: str
    analytic: float
    monte_carlo_mean: float
    monte_carlo_stderr: float
    relative_error: float
    seeds: int
    note: Optional[str] = None


class SimulationRun(BaseModel):
    """Everything one run produced; the report is recomputable from the rest."""
    report: SimReport
    ticks: List[TickRecord] = Field(default_factory=list)
    events: List[Event] = Field(default_factory=list)
    replicas: List[Replica] = Field(default_factory=list)
    outcomes: List[RequestOutcome] = Field(default_factory=list)
    ledger: BillingLedger = Field(default_factory=BillingLedger)
