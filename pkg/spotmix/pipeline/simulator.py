"""Trace-driven simulation: trace -> cluster -> policy loop -> requests -> report."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from ..generators.trace_generator import TraceGenerator
from ..generators.workload_generator import gen_workload
from ..models.cluster import EventKind
from ..models.experiment import ExperimentConfig
from ..models.policy import PolicyContext
from ..models.report import SimulationRun, TickRecord
from ..models.trace import CapacityTrace
from ..models.workload import Request
from .autoscaler import Autoscaler, initial_target
from .cluster import ClusterState
from .metrics import build_report
from .policies import Policy, make_policy
from .requests import simulate_requests

logger = logging.getLogger(__name__)


def resolve_trace(config: ExperimentConfig) -> CapacityTrace:
    """Load the configured trace file or generate one from the root seed."""
    generator = TraceGenerator()
    if config.trace.path is not None:
        return generator.load(config.trace.path)
    return generator.generate_from_config(config.trace.generator, config.seed)


def request_rates(requests: Sequence[Request], horizon: int, tick_seconds: int) -> np.ndarray:
    """Arrivals per second for every tick."""
    ticks = np.array([r.tick(tick_seconds) for r in requests], dtype=np.int64)
    ticks = ticks[ticks < horizon]
    return np.bincount(ticks, minlength=horizon)[:horizon] / tick_seconds


def run_cluster(trace: CapacityTrace, policy: Policy, autoscaler: Autoscaler,
                cold_start_ticks: int, seed: int,
                od_capacity: Optional[int] = None) -> tuple:
    """Replay the trace under `policy`; returns (cluster, tick records)."""
    cluster = ClusterState(trace, cold_start_ticks, seed, od_capacity)
    zone_costs = trace.spot_costs()
    ticks: List[TickRecord] = []

    for t in range(trace.horizon):
        if t > 0:
            policy.observe(cluster.step())
        seen = cluster.counts()
        n_tar = autoscaler.target(t)
        ctx = PolicyContext(
            t=t, n_tar=n_tar, counts=seen,
            replicas=cluster.live_replicas(), zone_costs=zone_costs,
        )
        cluster.apply(policy.decide(ctx))

        after = cluster.counts()
        ticks.append(TickRecord(
            t=t,
            n_tar=n_tar,
            spot=after.spot,
            spot_ready=after.spot_ready,
            on_demand=after.on_demand,
            on_demand_ready=after.on_demand_ready,
            spot_ready_seen=seen.spot_ready,
            per_zone=after.per_zone,
        ))
    return cluster, ticks


def run_simulation(config: ExperimentConfig, trace: Optional[CapacityTrace] = None) -> SimulationRun:
    """One complete run of `config`; a pre-built trace can be passed in."""
    trace = trace or resolve_trace(config)
    horizon_s = trace.horizon * trace.tick_seconds
    d = config.cluster.cold_start_ticks(trace.tick_seconds)
    logger.info("Run %s: policy=%s seed=%d trace=%s d=%d",
                config.name, config.policy.name.value, config.seed, trace.name, d)

    needs_rates = config.policy.n_tar_override is None
    requests: List[Request] = []
    if needs_rates or config.metrics.simulate_requests:
        requests = gen_workload(config.workload, horizon_s, config.seed)
    rates = request_rates(requests, trace.horizon, trace.tick_seconds)

    autoscaler = Autoscaler(config.policy, rates, initial_target(config.policy, config.workload))
    policy = make_policy(trace.zone_ids, config.policy)
    cluster, ticks = run_cluster(trace, policy, autoscaler, d, config.seed, config.cluster.od_capacity)

    replicas = [cluster.replicas[i] for i in sorted(cluster.replicas)]
    outcomes = []
    if config.metrics.simulate_requests:
        zone_latency = {
            zone.id: config.cluster.network_latency_s.get(zone.region, 0.0) for zone in trace.zones
        }
        outcomes = simulate_requests(
            replicas, requests, trace.tick_seconds,
            max_concurrency=config.cluster.max_concurrency,
            lb_mode=config.cluster.lb_mode,
            zone_latency_s=zone_latency,
            max_attempts=config.workload.max_attempts,
        )

    ledger = cluster.bill()
    k = min(zone.od_unit_cost for zone in trace.zones)
    report = build_report(
        policy=config.policy.name.value,
        trace=trace.name,
        seed=config.seed,
        n_extra=config.policy.n_extra,
        cold_start_ticks=d,
        ticks=ticks,
        ledger=ledger,
        k=k,
        preemptions=sum(1 for e in cluster.events if e.event == EventKind.PREEMPTED),
        launch_failures=sum(1 for e in cluster.events if e.event == EventKind.LAUNCH_FAILED),
        outcomes=outcomes,
        warmup_ticks=config.metrics.warmup_ticks,
        include_timeouts=config.metrics.include_timeouts_in_latency,
    )
    logger.info("Run %s finished: availability=%.4f relative cost=%.4f",
                config.name, report.availability, report.cost_relative_to_od)
    return SimulationRun(
        report=report, ticks=ticks, events=cluster.events,
        replicas=replicas, outcomes=outcomes, ledger=ledger,
    )
