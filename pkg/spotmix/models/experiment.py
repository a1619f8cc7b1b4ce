"""Experiment configuration: one JSON file describes one run."""

import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from .policy import PolicyConfig
from .trace import PoissonZoneModel
from .workload import LoadBalancerMode, WorkloadSpec


class GeneratorConfig(BaseModel):
    """Synthetic capacity trace parameters."""
    zones: List[PoissonZoneModel] = Field(..., min_length=1)
    horizon: int = Field(2000, ge=1, description="Ticks")
    tick_seconds: int = Field(10, gt=0)
    refill_ticks: int = Field(30, ge=1, description="Ticks per unit of capacity recovery")
    k: float = Field(3.0, gt=1, description="On-demand cost as a multiple of mean spot cost")
    region_episodes: Dict[str, List[Tuple[int, int]]] = Field(
        default_factory=dict,
        description="Region-wide (start, end) ticks with zero capacity in every zone"
    )
    name: str = Field("generated", description="Label carried into reports")


class TraceSource(BaseModel):
    """Either a trace file or a generator, not both."""
    path: Optional[Path] = None
    generator: Optional[GeneratorConfig] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "TraceSource":
        if (self.path is None) == (self.generator is None):
            raise ValueError("set exactly one of trace.path or trace.generator")
        return self


class ClusterConfig(BaseModel):
    """Execution layer and serving parameters."""
    cold_start_s: float = Field(180.0, ge=0, description="Launch-to-ready delay d")
    od_capacity: Optional[int] = Field(None, ge=0, description="Cap on live on-demand replicas")
    max_concurrency: int = Field(8, ge=1, description="Request slots per replica")
    lb_mode: LoadBalancerMode = LoadBalancerMode.LEAST_LOAD
    network_latency_s: Dict[str, float] = Field(
        default_factory=dict,
        description="Round-trip client delay by replica region"
    )

    def cold_start_ticks(self, tick_seconds: int) -> int:
        return int(math.ceil(self.cold_start_s / tick_seconds - 1e-9))


class MetricsConfig(BaseModel):
    warmup_ticks: Optional[int] = Field(
        None, ge=0,
        description="Ticks excluded from availability; defaults to the cold-start ticks"
    )
    include_timeouts_in_latency: bool = True
    simulate_requests: bool = True


class OutputConfig(BaseModel):
    out_dir: Optional[Path] = Field(None, description="Defaults to runs/<name>")
    charts: bool = True
    event_log: bool = True


class ExperimentConfig(BaseModel):
    """Complete description of one simulation run."""
    name: str = Field("experiment", description="Experiment label")
    seed: int = Field(0, ge=0, description="Root seed for every random sub-stream")
    trace: TraceSource
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    policy: PolicyConfig = Field(default_factory=PolicyConfig)
    cluster: ClusterConfig = Field(default_factory=ClusterConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def resolved_out_dir(self) -> Path:
        return self.output.out_dir or Path("runs") / self.name
