"""Request stream generation: Poisson, bursty and replayed traces."""

import json
import logging
import math
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..errors import TraceFormatError
from ..models.workload import Request, ServiceDistribution, ServiceTimeSpec, WorkloadKind, WorkloadSpec
from ..rng import substream

logger = logging.getLogger(__name__)


class WorkloadTraceRecord(BaseModel):
    """One line of a JSON-lines workload replay file."""
    arrival_s: float = Field(..., ge=0)
    service_s: Optional[float] = Field(None, gt=0)


class WorkloadGenerator:
    """Turns a WorkloadSpec into a deterministic list of requests."""

    def __init__(self, spec: WorkloadSpec, seed: int = 0):
        self.spec = spec
        self.seed = spec.seed if spec.seed is not None else seed

    def generate(self, horizon_s: float) -> List[Request]:
        """Requests arriving in [0, horizon_s), ordered by arrival."""
        if self.spec.kind == WorkloadKind.POISSON:
            arrivals = self._poisson_arrivals(horizon_s)
            services = self.sample_service_times(len(arrivals))
        elif self.spec.kind == WorkloadKind.BURSTY:
            arrivals = self._bursty_arrivals(horizon_s)
            services = self.sample_service_times(len(arrivals))
        else:
            arrivals, services = self._replay(horizon_s)

        requests = [
            Request(id=index, arrival_s=float(arrival), service_s=float(service),
                    timeout_s=self.spec.timeout_s)
            for index, (arrival, service) in enumerate(zip(arrivals, services))
        ]
        logger.info("Generated %d %s requests over %.0fs", len(requests), self.spec.kind.value, horizon_s)
        return requests

    def _poisson_arrivals(self, horizon_s: float) -> np.ndarray:
        """Exponential inter-arrivals at spec.rate."""
        return self._homogeneous(self.spec.rate, horizon_s, substream(self.seed, "workload", "arrivals"))

    def _homogeneous(self, rate: float, horizon_s: float, rng: np.random.Generator) -> np.ndarray:
        expected = rate * horizon_s
        chunk = int(expected + 6 * math.sqrt(expected) + 16)
        gaps = rng.exponential(1.0 / rate, size=chunk)
        arrivals = np.cumsum(gaps)
        while arrivals[-1] < horizon_s:
            more = np.cumsum(rng.exponential(1.0 / rate, size=chunk)) + arrivals[-1]
            arrivals = np.concatenate([arrivals, more])
        return arrivals[arrivals < horizon_s]

    def _bursty_arrivals(self, horizon_s: float) -> np.ndarray:
        """Poisson with a rate spike of burst_multiplier once per burst period.

        Sampled by thinning a homogeneous process at the peak rate.
        """
        spec = self.spec
        peak = spec.rate * spec.burst_multiplier
        rng = substream(self.seed, "workload", "arrivals")
        candidates = self._homogeneous(peak, horizon_s, rng)

        periods = int(math.ceil(horizon_s / spec.burst_period_s))
        offsets = substream(self.seed, "workload", "bursts").uniform(
            0.0, spec.burst_period_s - spec.burst_duration_s, size=periods
        )
        period_index = (candidates // spec.burst_period_s).astype(np.int64)
        into_period = candidates - period_index * spec.burst_period_s
        start = offsets[period_index]
        in_burst = (into_period >= start) & (into_period < start + spec.burst_duration_s)

        rate = np.where(in_burst, peak, spec.rate)
        keep = rng.random(len(candidates)) < rate / peak
        return candidates[keep]

    def sample_service_times(self, count: int) -> np.ndarray:
        """Service demands capped at the request timeout."""
        service: ServiceTimeSpec = self.spec.service
        rng = substream(self.seed, "workload", "service")
        if service.distribution == ServiceDistribution.DETERMINISTIC:
            samples = np.full(count, service.value_s)
        elif service.distribution == ServiceDistribution.EXPONENTIAL:
            samples = rng.exponential(service.mean_s, size=count)
        else:
            samples = rng.lognormal(math.log(service.median_s), service.sigma, size=count)
        samples = np.minimum(samples, self.spec.timeout_s)
        # Exponential draws can round to zero
        return np.maximum(samples, 1e-6)

    def _replay(self, horizon_s: float):
        """Read (arrival, optional service) records; missing service times are sampled."""
        records = load_workload_trace(self.spec.trace_path)
        records = [record for record in records if record.arrival_s < horizon_s]
        sampled = self.sample_service_times(len(records))
        arrivals = [record.arrival_s for record in records]
        services = [
            min(record.service_s, self.spec.timeout_s) if record.service_s is not None else sampled[index]
            for index, record in enumerate(records)
        ]
        return arrivals, services


def load_workload_trace(path: Path) -> List[WorkloadTraceRecord]:
    """Parse a JSON-lines workload file; blank lines are skipped."""
    records: List[WorkloadTraceRecord] = []
    last_arrival = 0.0
    with open(path, "r") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = WorkloadTraceRecord.model_validate(json.loads(line))
            except (json.JSONDecodeError, ValidationError) as e:
                raise TraceFormatError(f"{path}: line {line_number} is not a valid request record ({e})") from e
            if record.arrival_s < last_arrival:
                raise TraceFormatError(f"{path}: line {line_number} arrives before the previous record")
            last_arrival = record.arrival_s
            records.append(record)
    return records


def gen_workload(spec: WorkloadSpec, horizon_s: float, seed: int = 0) -> List[Request]:
    return WorkloadGenerator(spec, seed).generate(horizon_s)
