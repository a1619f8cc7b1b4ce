"""Post-run checks of the invariants every simulated run must satisfy."""

from typing import Any, Dict, List, Optional, Tuple

from ..models.policy import PolicyName
from ..models.report import SimulationRun
from ..models.trace import CapacityTrace
from .policies import target_on_demand


class RunValidator:
    """Validates a finished run tick by tick against its trace."""

    def __init__(self, tolerance: float = 1e-6):
        self.tolerance = tolerance

    def validate_run(self, run: SimulationRun, trace: CapacityTrace, cold_start_ticks: int,
                     n_extra: Optional[int] = None) -> Tuple[bool, List[str]]:
        """All checks; `n_extra` enables the dynamic-fallback bounds."""
        errors = []
        errors.extend(self._check_capacity(run, trace))
        errors.extend(self._check_counts(run))
        errors.extend(self._check_readiness(run, cold_start_ticks))
        errors.extend(self._check_billing(run, trace))
        if n_extra is not None and run.report.policy == PolicyName.SPOTHEDGE.value:
            errors.extend(self._check_fallback(run, n_extra))
        return len(errors) == 0, errors

    def _check_capacity(self, run: SimulationRun, trace: CapacityTrace) -> List[str]:
        errors = []
        for tick in run.ticks:
            for zone_id, live in tick.per_zone.items():
                capacity = trace.capacity_at(zone_id, tick.t)
                if live > capacity:
                    errors.append(f"capacity: tick {tick.t} zone {zone_id} has {live} spot > C={capacity}")
        return errors

    def _check_counts(self, run: SimulationRun) -> List[str]:
        errors = []
        for tick in run.ticks:
            if tick.spot_ready > tick.spot or tick.on_demand_ready > tick.on_demand:
                errors.append(f"counts: tick {tick.t} has more ready than launched replicas")
            if sum(tick.per_zone.values()) != tick.spot:
                errors.append(f"counts: tick {tick.t} per-zone spot does not add up to S(t)")
        return errors

    def _check_readiness(self, run: SimulationRun, cold_start_ticks: int) -> List[str]:
        errors = []
        for replica in run.replicas:
            if replica.ready_at is not None and replica.ready_at < replica.launched_at + cold_start_ticks:
                errors.append(
                    f"readiness: replica {replica.id} ready at {replica.ready_at}, "
                    f"launched at {replica.launched_at} with d={cold_start_ticks}"
                )
            if replica.ended_at is not None and replica.ended_at < replica.launched_at:
                errors.append(f"readiness: replica {replica.id} ended before it launched")
        return errors

    def _check_fallback(self, run: SimulationRun, n_extra: int) -> List[str]:
        errors = []
        for tick in run.ticks:
            if tick.on_demand > tick.n_tar:
                errors.append(f"fallback: tick {tick.t} has O={tick.on_demand} > N_Tar={tick.n_tar}")
            expected = target_on_demand(tick.n_tar, n_extra, tick.spot_ready_seen)
            if tick.on_demand != expected:
                errors.append(f"fallback: tick {tick.t} has O={tick.on_demand}, expected {expected}")
        return errors

    def _check_billing(self, run: SimulationRun, trace: CapacityTrace) -> List[str]:
        """Ledger total equals per-tick launched counts weighted by unit cost."""
        spot_costs = trace.spot_costs()
        od_cost = min(zone.od_unit_cost for zone in trace.zones)
        recount = 0.0
        for tick in run.ticks:
            recount += sum(spot_costs[zone_id] * live for zone_id, live in tick.per_zone.items())
            recount += od_cost * tick.on_demand
        if abs(recount - run.ledger.total) > self.tolerance * max(1.0, recount):
            return [f"billing: ledger {run.ledger.total:.6f} != per-tick recount {recount:.6f}"]
        return []

    def get_validation_summary(self, errors: List[str]) -> Dict[str, Any]:
        """Counts errors by the check that raised them."""
        error_types: Dict[str, int] = {}
        for error in errors:
            error_type = error.split(":")[0] if ":" in error else "general"
            error_types[error_type] = error_types.get(error_type, 0) + 1
        return {
            "total_errors": len(errors),
            "error_types": error_types,
            "is_valid": len(errors) == 0,
        }
