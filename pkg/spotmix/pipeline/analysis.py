"""Closed-form and Monte Carlo expected preemption counts for static and round-robin spreads."""

import logging
import math
from typing import List, Sequence

import numpy as np

from ..errors import DomainError
from ..models.report import AnalysisRow
from ..rng import substream
from .policies import even_quotas

logger = logging.getLogger(__name__)


def _check(n: int, lambdas: Sequence[float], horizon: float):
    if n < 0 or horizon < 0:
        raise DomainError("n and T must be non-negative")
    if not lambdas:
        raise DomainError("at least one zone rate is required")
    if any(rate < 0 for rate in lambdas):
        raise DomainError("preemption rates must be non-negative")


def expected_preemptions_static(n: int, lambdas: Sequence[float], horizon: float) -> float:
    """E[K] = n T mean(lambda): n/N replicas pinned to each zone."""
    _check(n, lambdas, horizon)
    return n * horizon * sum(lambdas) / len(lambdas)


def expected_preemptions_round_robin(n: int, lambdas: Sequence[float], horizon: float) -> float:
    """E[K] = n T N / sum(1/lambda): replicas cycle through zones, staying 1/lambda_i in each."""
    _check(n, lambdas, horizon)
    if any(rate == 0 for rate in lambdas):
        raise DomainError("round-robin expectation is undefined when a zone never preempts")
    return n * horizon * len(lambdas) / sum(1.0 / rate for rate in lambdas)


def _replica_preemptions(rng: np.random.Generator, lambdas: Sequence[float], zone: int, horizon: float,
                         advance: int) -> int:
    """Preemptions of one replica relaunched at once, `advance` zones on after each preemption."""
    count, clock = 0, 0.0
    while True:
        rate = lambdas[zone]
        if rate == 0:
            return count
        clock += rng.exponential(1.0 / rate)
        if clock >= horizon:
            return count
        count += 1
        zone = (zone + advance) % len(lambdas)


def simulate_static(n: int, lambdas: Sequence[float], horizon: float, seed: int) -> int:
    """Preemptions of an even static spread; each replica is relaunched in its own zone."""
    rng = substream(seed, "analysis", "static")
    zones = [str(i) for i in range(len(lambdas))]
    quotas = even_quotas(zones, n)
    return sum(
        _replica_preemptions(rng, lambdas, index, horizon, advance=0)
        for index, zone in enumerate(zones)
        for _ in range(quotas[zone])
    )


def simulate_round_robin(n: int, lambdas: Sequence[float], horizon: float, seed: int) -> int:
    """Preemptions when each replica moves to the next zone after every preemption."""
    rng = substream(seed, "analysis", "round_robin")
    return sum(_replica_preemptions(rng, lambdas, replica % len(lambdas), horizon, advance=1)
               for replica in range(n))


def _row(policy: str, analytic: float, samples: List[int], note: str = None) -> AnalysisRow:
    values = np.asarray(samples, dtype=float)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    relative = abs(mean - analytic) / analytic if analytic > 0 else abs(mean)
    return AnalysisRow(
        policy=policy,
        analytic=analytic,
        monte_carlo_mean=mean,
        monte_carlo_stderr=stderr,
        relative_error=relative,
        seeds=len(values),
        note=note,
    )


def run_analysis(n: int, lambdas: Sequence[float], horizon: float, seeds: int = 1000) -> List[AnalysisRow]:
    """Closed forms next to Monte Carlo means over `seeds` independent runs."""
    if seeds < 1:
        raise DomainError("at least one seed is required")
    static = expected_preemptions_static(n, lambdas, horizon)
    round_robin = expected_preemptions_round_robin(n, lambdas, horizon)
    rows = [
        _row("static", static, [simulate_static(n, lambdas, horizon, s) for s in range(seeds)]),
        _row("round_robin", round_robin, [simulate_round_robin(n, lambdas, horizon, s) for s in range(seeds)],
             note="fewer than static" if round_robin < static else "equal to static"),
    ]
    for row in rows:
        logger.info("%s: analytic %.3f, simulated %.3f +/- %.3f",
                    row.policy, row.analytic, row.monte_carlo_mean, row.monte_carlo_stderr)
    return rows
