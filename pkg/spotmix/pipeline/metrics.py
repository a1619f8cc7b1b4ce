"""Evaluation metrics over a finished run."""

import math
from typing import List, Optional, Sequence

from ..models.cluster import BillingLedger
from ..models.report import LatencySummary, SimReport, TickRecord
from ..models.workload import RequestOutcome, RequestStatus


def availability(ready: Sequence[int], n_tar: Sequence[int], warmup_ticks: int = 0) -> float:
    """Fraction of ticks from `warmup_ticks` on where ready replicas reach N_Tar."""
    if len(ready) != len(n_tar):
        raise ValueError("ready and n_tar series must have the same length")
    counted = range(min(warmup_ticks, len(ready)), len(ready))
    if not counted:
        return 1.0
    met = sum(1 for t in counted if ready[t] >= n_tar[t])
    return met / len(counted)


def relative_cost(total_cost: float, n_tar: Sequence[int], k: float) -> float:
    """Cost relative to running exactly N_Tar on-demand replicas."""
    reference = k * sum(n_tar)
    if reference <= 0:
        return 0.0
    return total_cost / reference


def nearest_rank(values: Sequence[float], percentile: float) -> float:
    ordered = sorted(values)
    if not ordered:
        return 0.0
    rank = max(1, int(math.ceil(round(percentile / 100.0 * len(ordered), 9))))
    return ordered[rank - 1]


def latency_percentiles(outcomes: Sequence[RequestOutcome], include_timeouts: bool = True) -> LatencySummary:
    """Nearest-rank p50/p90/p99; timed-out requests count at their timeout."""
    counted = {RequestStatus.COMPLETED}
    if include_timeouts:
        counted.add(RequestStatus.TIMED_OUT)
    latencies = [o.latency_s for o in outcomes if o.status in counted]
    if not latencies:
        return LatencySummary()
    return LatencySummary(
        p50=nearest_rank(latencies, 50),
        p90=nearest_rank(latencies, 90),
        p99=nearest_rank(latencies, 99),
        mean=sum(latencies) / len(latencies),
        count=len(latencies),
    )


def failure_rate(outcomes: Sequence[RequestOutcome]) -> float:
    if not outcomes:
        return 0.0
    failed = sum(1 for o in outcomes if o.status != RequestStatus.COMPLETED)
    return failed / len(outcomes)


def build_report(policy: str, trace: str, seed: int, n_extra: int, cold_start_ticks: int,
                 ticks: List[TickRecord], ledger: BillingLedger, k: float,
                 preemptions: int, launch_failures: int,
                 outcomes: Optional[Sequence[RequestOutcome]] = None,
                 warmup_ticks: Optional[int] = None,
                 include_timeouts: bool = True) -> SimReport:
    """Assemble the scalar report of one run."""
    ready = [tick.ready_total for tick in ticks]
    n_tar = [tick.n_tar for tick in ticks]
    warmup = cold_start_ticks if warmup_ticks is None else warmup_ticks
    outcomes = outcomes or []
    latency = latency_percentiles(outcomes, include_timeouts)

    return SimReport(
        policy=policy,
        trace=trace,
        seed=seed,
        n_extra=n_extra,
        cold_start_ticks=cold_start_ticks,
        availability=availability(ready, n_tar, warmup),
        cost_total=ledger.total,
        cost_spot=ledger.spot_cost,
        cost_od=ledger.od_cost,
        cost_relative_to_od=relative_cost(ledger.total, n_tar, k),
        latency_p50=latency.p50,
        latency_p90=latency.p90,
        latency_p99=latency.p99,
        latency_mean=latency.mean,
        failure_rate=failure_rate(outcomes),
        requests=len(outcomes),
        preemptions=preemptions,
        launch_failures=launch_failures,
        ticks=len(ticks),
        ready_series=ready,
        n_tar_series=n_tar,
    )
