"""Simulation pipeline: cluster, policies, requests, optimum, metrics and sweeps."""

from .cluster import ClusterState
from .placement import handle_preemption, handle_launch, select_next_zone
from .autoscaler import Autoscaler, autoscale_target
from .policies import (
    POLICIES, Policy, SpotHedgePolicy, EvenSpreadPolicy, RoundRobinPolicy,
    StaticMixturePolicy, OnDemandOnlyPolicy, make_policy, target_on_demand
)
from .balancer import LoadBalancer, ReplicaServer
from .requests import RequestSimulator, simulate_requests
from .omniscient import build_instance, solve_exact, brute_force, evaluate_solution
from .analysis import expected_preemptions_static, expected_preemptions_round_robin, run_analysis
from .simulator import run_simulation, run_cluster
from .validator import RunValidator
from .orchestrator import SweepOrchestrator

__all__ = [
    "ClusterState",
    "handle_preemption", "handle_launch", "select_next_zone",
    "Autoscaler", "autoscale_target",
    "POLICIES", "Policy", "SpotHedgePolicy", "EvenSpreadPolicy", "RoundRobinPolicy",
    "StaticMixturePolicy", "OnDemandOnlyPolicy", "make_policy", "target_on_demand",
    "LoadBalancer", "ReplicaServer",
    "RequestSimulator", "simulate_requests",
    "build_instance", "solve_exact", "brute_force", "evaluate_solution",
    "expected_preemptions_static", "expected_preemptions_round_robin", "run_analysis",
    "run_simulation", "run_cluster",
    "RunValidator",
    "SweepOrchestrator",
]
