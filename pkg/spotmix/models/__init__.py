"""Domain models for spot/on-demand serving simulation."""

from .trace import Zone, CapacityTrace, PoissonZoneModel
from .cluster import Replica, ReplicaKind, ReplicaState, Event, EventKind, ClusterCounts, BillingLedger
from .policy import PolicyName, PolicyConfig, ZoneBook, ScalingDecision, PolicyContext
from .workload import (
    WorkloadKind, WorkloadSpec, ServiceTimeSpec, ServiceDistribution,
    Request, RequestOutcome, RequestStatus, LoadBalancerMode
)
from .omniscient import OmniscientInstance, OmniscientSchedule, OmniscientSolution, SolutionEvaluation, OptimizeRequest
from .report import TickRecord, LatencySummary, SimReport, AnalysisRow, SimulationRun
from .experiment import ExperimentConfig, GeneratorConfig, TraceSource, ClusterConfig, MetricsConfig

__all__ = [
    "Zone", "CapacityTrace", "PoissonZoneModel",
    "Replica", "ReplicaKind", "ReplicaState", "Event", "EventKind", "ClusterCounts", "BillingLedger",
    "PolicyName", "PolicyConfig", "ZoneBook", "ScalingDecision", "PolicyContext",
    "WorkloadKind", "WorkloadSpec", "ServiceTimeSpec", "ServiceDistribution",
    "Request", "RequestOutcome", "RequestStatus", "LoadBalancerMode",
    "OmniscientInstance", "OmniscientSchedule", "OmniscientSolution", "SolutionEvaluation", "OptimizeRequest",
    "TickRecord", "LatencySummary", "SimReport", "AnalysisRow", "SimulationRun",
    "ExperimentConfig", "GeneratorConfig", "TraceSource", "ClusterConfig", "MetricsConfig",
]
