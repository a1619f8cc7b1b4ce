"""Request workload models."""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class WorkloadKind(str, Enum):
    POISSON = "poisson"
    TRACE = "trace"
    BURSTY = "bursty"


class ServiceDistribution(str, Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    LOGNORMAL = "lognormal"


class ServiceTimeSpec(BaseModel):
    """Per-request service demand; samples are capped at the request timeout."""
    distribution: ServiceDistribution = ServiceDistribution.LOGNORMAL
    value_s: float = Field(10.0, gt=0, description="deterministic: the service time")
    mean_s: float = Field(10.0, gt=0, description="exponential: the mean")
    median_s: float = Field(10.0, gt=0, description="lognormal: the median")
    sigma: float = Field(0.8, ge=0, description="lognormal: sigma of the underlying normal")


class WorkloadSpec(BaseModel):
    """Where requests come from and how long they take."""
    kind: WorkloadKind = WorkloadKind.POISSON
    rate: float = Field(0.15, gt=0, description="Mean arrivals per second (poisson, bursty base)")
    trace_path: Optional[Path] = Field(None, description="JSON-lines replay file for kind=trace")
    service: ServiceTimeSpec = Field(default_factory=ServiceTimeSpec)
    timeout_s: float = Field(100.0, gt=0)
    max_attempts: int = Field(5, ge=1, description="Attempts before a request fails for good")
    burst_multiplier: float = Field(5.0, ge=1.0)
    burst_period_s: float = Field(3600.0, gt=0)
    burst_duration_s: float = Field(300.0, gt=0)
    seed: Optional[int] = Field(None, description="Overrides the experiment seed for this stream")

    @model_validator(mode="after")
    def _trace_needs_path(self) -> "WorkloadSpec":
        if self.kind == WorkloadKind.TRACE and self.trace_path is None:
            raise ValueError("trace_path is required when kind is 'trace'")
        if self.burst_duration_s > self.burst_period_s:
            raise ValueError("burst_duration_s cannot exceed burst_period_s")
        return self


class Request(BaseModel):
    """One client request."""
    id: int
    arrival_s: float = Field(..., ge=0)
    service_s: float = Field(..., gt=0)
    timeout_s: float = Field(100.0, gt=0)

    @property
    def deadline_s(self) -> float:
        return self.arrival_s + self.timeout_s

    def tick(self, tick_seconds: int) -> int:
        """Tick the request arrives in."""
        return int(self.arrival_s // tick_seconds)


class RequestStatus(str, Enum):
    COMPLETED = "completed"
    TIMED_OUT = "timed_out"
    FAILED_FINAL = "failed_final"


class RequestOutcome(BaseModel):
    """Terminal result of one request, including time lost to failed attempts."""
    request_id: int
    status: RequestStatus
    latency_s: float = Field(..., ge=0)
    attempts: int = Field(1, ge=1)
    service_s: float = Field(..., gt=0)
    servers_visited: List[int] = Field(default_factory=list)


class LoadBalancerMode(str, Enum):
    ROUND_ROBIN = "round_robin"
    LEAST_LOAD = "least_load"
