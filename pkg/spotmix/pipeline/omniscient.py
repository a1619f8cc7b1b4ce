"""Offline optimum with full knowledge of future spot capacity.

The integer program minimises launched spot plus k times launched on-demand
replicas subject to an availability count, per-zone capacity, cold-start
readiness windows and an indicator linking readiness to N_Tar. It is solved
exactly by a breadth-first branch-and-bound over per-tick launch totals.
Zones only enter through the capacity bound, so a per-tick total S(t) is
turned into S(z,t) by filling zones in trace order.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError, InfeasibleError, SolverBudgetError
from ..models.cluster import Event, EventKind, ReplicaKind
from ..models.omniscient import (
    Constraint, OmniscientInstance, OmniscientSchedule, OmniscientSolution, SolutionEvaluation
)
from ..models.report import TickRecord
from ..models.trace import CapacityTrace

logger = logging.getLogger(__name__)

# |Z| * T * N_max above this is refused outright
SIZE_BUDGET = 4800
NODE_BUDGET = 5_000_000
BRUTE_FORCE_BUDGET = 4_000_000


def build_instance(trace: CapacityTrace, n_tar: Union[int, Sequence[int]], avail_tar: float,
                   d: int, k: float, n_max: Optional[int] = None,
                   od_max: Optional[int] = None) -> OmniscientInstance:
    """Materialise every constraint of the program over `trace`."""
    targets = [int(n_tar)] * trace.horizon if isinstance(n_tar, int) else [int(n) for n in n_tar]
    if n_max is None:
        n_max = max(targets) if targets else 0
    instance = OmniscientInstance(
        trace=trace, n_tar=targets, avail_tar=avail_tar, d=d, k=k, n_max=n_max, od_max=od_max,
    )
    instance.constraints = _constraints(instance)
    return instance


def _constraints(instance: OmniscientInstance) -> List[Constraint]:
    trace = instance.trace
    horizon = instance.horizon
    big_m = 2 * instance.n_max + 1
    constraints = [Constraint(
        name="availability",
        terms={f"M[{t}]": 1.0 for t in range(horizon)},
        sense=">=",
        rhs=horizon * instance.avail_tar,
    )]

    for zone in trace.zones:
        for t in range(horizon):
            constraints.append(Constraint(
                name=f"capacity[{zone.id},{t}]",
                terms={f"S[{zone.id},{t}]": 1.0},
                sense="<=",
                rhs=float(trace.capacity_at(zone.id, t)),
            ))

    # Ready counts are bounded by launches over the readiness window
    for t in range(horizon):
        if instance.d == 0:
            family = "zero_delay"
        elif t < instance.d:
            family = "warm_start"
        else:
            family = "readiness"
        for prior in instance.readiness_window(t):
            spot_terms = {f"S[{zone.id},{prior}]": 1.0 for zone in trace.zones}
            spot_terms[f"Sr[{t}]"] = -1.0
            constraints.append(Constraint(name=f"{family}[S,{t},{prior}]", terms=spot_terms, sense=">=", rhs=0.0))
            constraints.append(Constraint(
                name=f"{family}[O,{t},{prior}]",
                terms={f"O[{prior}]": 1.0, f"Or[{t}]": -1.0},
                sense=">=",
                rhs=0.0,
            ))

    for t, target in enumerate(instance.n_tar):
        ready = {f"Sr[{t}]": 1.0, f"Or[{t}]": 1.0, f"M[{t}]": -float(big_m)}
        constraints.append(Constraint(name=f"indicator[lower,{t}]", terms=ready, sense=">=", rhs=float(target - big_m)))
        constraints.append(Constraint(name=f"indicator[upper,{t}]", terms=ready, sense="<=", rhs=float(target - 1)))
    return constraints


def _spot_limits(instance: OmniscientInstance) -> np.ndarray:
    """Largest useful S(t): capacity summed over zones, capped at n_max."""
    capped = np.minimum(instance.trace.capacity, instance.n_max).sum(axis=0)
    return np.minimum(capped, instance.n_max)


def _window_minima(values: np.ndarray, instance: OmniscientInstance) -> np.ndarray:
    """min over each tick's readiness window, along the last axis."""
    minima = np.empty_like(values)
    for t in range(instance.horizon):
        window = instance.readiness_window(t)
        minima[..., t] = values[..., window.start:window.stop].min(axis=-1)
    return minima


def _readiness(instance: OmniscientInstance, spot: Sequence[int], on_demand: Sequence[int]):
    """Largest S_r, O_r the schedule supports (capped at N_Tar) and the resulting M."""
    spot_min = _window_minima(np.asarray(spot, dtype=np.int64), instance)
    od_min = _window_minima(np.asarray(on_demand, dtype=np.int64), instance)
    spot_ready, od_ready, met = [], [], []
    for t, target in enumerate(instance.n_tar):
        s_r = min(int(spot_min[t]), target)
        o_r = min(int(od_min[t]), target - s_r)
        spot_ready.append(s_r)
        od_ready.append(o_r)
        met.append(1 if s_r + o_r >= target else 0)
    return spot_ready, od_ready, met


def _fill_zones(instance: OmniscientInstance, totals: Sequence[int]) -> List[List[int]]:
    """Spread S(t) over zones in trace order, respecting C(z,t)."""
    trace = instance.trace
    spot = [[0] * instance.horizon for _ in trace.zones]
    for t, total in enumerate(totals):
        remaining = int(total)
        for row in range(len(trace.zones)):
            take = min(remaining, int(trace.capacity[row, t]))
            spot[row][t] = take
            remaining -= take
        if remaining:
            raise DomainError(f"S({t})={total} exceeds the capacity of every zone")
    return spot


def _solution(instance: OmniscientInstance, totals: Sequence[int], on_demand: Sequence[int],
              nodes: int) -> OmniscientSolution:
    spot_ready, od_ready, met = _readiness(instance, totals, on_demand)
    return OmniscientSolution(
        spot=_fill_zones(instance, totals),
        on_demand=[int(o) for o in on_demand],
        spot_ready=spot_ready,
        od_ready=od_ready,
        met=met,
        objective=float(sum(totals)) + instance.k * float(sum(on_demand)),
        nodes=nodes,
    )


def _check_budget(instance: OmniscientInstance):
    size = len(instance.trace.zones) * instance.horizon * max(instance.n_max, 1)
    if size > SIZE_BUDGET:
        raise SolverBudgetError(
            f"|Z|*T*N_max = {size} exceeds the exact-solve limit {SIZE_BUDGET}; shrink the instance"
        )


class _TickBounds:
    """Per-tick relaxed minimum cost of covering that tick in isolation."""

    def __init__(self, instance: OmniscientInstance, spot_limits: np.ndarray):
        self.instance = instance
        od_limit = instance.od_limit
        self.window_capacity = _window_minima(spot_limits, instance)
        costs = []
        for t, target in enumerate(instance.n_tar):
            from_spot = min(target, int(self.window_capacity[t]))
            shortfall = target - from_spot
            costs.append(math.inf if shortfall > od_limit else from_spot + instance.k * shortfall)
        self.costs = costs
        # suffix[t]: cumulative sums of the sorted finite costs of ticks t..T-1
        self.suffix = []
        for t in range(instance.horizon + 1):
            finite = sorted(c for c in costs[t:] if c != math.inf)
            self.suffix.append(list(itertools.accumulate(finite)))

    def remaining(self, start: int, needed: int) -> float:
        """Cheapest way to cover `needed` more ticks among ticks start..T-1."""
        if needed <= 0:
            return 0.0
        sums = self.suffix[start]
        if needed > len(sums):
            return math.inf
        return sums[needed - 1]

    def greedy(self, required: int) -> Optional[Tuple[List[int], List[int]]]:
        """Cover the `required` cheapest ticks; a feasible starting incumbent."""
        order = sorted((c, t) for t, c in enumerate(self.costs) if c != math.inf)
        if len(order) < required:
            return None
        spot = [0] * self.instance.horizon
        on_demand = [0] * self.instance.horizon
        for _, t in order[:required]:
            target = self.instance.n_tar[t]
            from_spot = min(target, int(self.window_capacity[t]))
            for prior in self.instance.readiness_window(t):
                spot[prior] = max(spot[prior], from_spot)
                on_demand[prior] = max(on_demand[prior], target - from_spot)
        return spot, on_demand


def solve_exact(instance: OmniscientInstance, node_budget: int = NODE_BUDGET) -> OmniscientSolution:
    """Provably optimal schedule, or InfeasibleError / SolverBudgetError."""
    _check_budget(instance)
    horizon = instance.horizon
    required = instance.required_ticks
    top = max(instance.n_tar) if instance.n_tar else 0
    # Launching more than the largest target never helps readiness
    spot_limits = np.minimum(_spot_limits(instance), top)
    od_limit = min(instance.od_limit, top)
    bounds = _TickBounds(instance, spot_limits)
    history = max(instance.d, 1) - 1

    if bounds.remaining(0, required) == math.inf:
        raise InfeasibleError(
            f"at most {len(bounds.suffix[0])} ticks can be covered; {required} are required"
        )

    incumbent_cost = math.inf
    incumbent = bounds.greedy(required)
    if incumbent is not None:
        incumbent_cost = float(sum(incumbent[0])) + instance.k * float(sum(incumbent[1]))

    # state key: (spot suffix minima, on-demand suffix minima, covered ticks capped at required)
    layer: Dict[tuple, Tuple[float, int]] = {((), (), 0): (0.0, -1)}
    parents: List[List[Tuple[int, int, int]]] = []
    nodes = 0
    for t in range(horizon):
        target = instance.n_tar[t]
        keys = list(layer.keys())
        next_layer: Dict[tuple, Tuple[float, int]] = {}
        records: List[Tuple[int, int, int]] = []
        for key in keys:
            spot_profile, od_profile, covered = key
            cost, parent_record = layer[key]
            for s in range(int(spot_limits[t]) + 1):
                spot_min = min(spot_profile[-1], s) if spot_profile else s
                new_spot = ((s,) + tuple(min(m, s) for m in spot_profile))[:history]
                for o in range(od_limit + 1):
                    nodes += 1
                    if nodes > node_budget:
                        raise SolverBudgetError(f"search exceeded {node_budget} nodes; shrink the instance")
                    od_min = min(od_profile[-1], o) if od_profile else o
                    met = 1 if spot_min + od_min >= target else 0
                    new_covered = min(required, covered + met)
                    new_cost = cost + s + instance.k * o
                    if new_cost + bounds.remaining(t + 1, required - new_covered) >= incumbent_cost - 1e-9:
                        continue
                    new_od = ((o,) + tuple(min(m, o) for m in od_profile))[:history]
                    new_key = (new_spot, new_od, new_covered)
                    best = next_layer.get(new_key)
                    if best is None or new_cost < best[0] - 1e-12:
                        records.append((parent_record, s, o))
                        next_layer[new_key] = (new_cost, len(records) - 1)
        parents.append(records)
        layer = next_layer
        if not layer:
            break

    best_key = None
    if layer and len(parents) == horizon:
        finals = [(cost, key) for key, (cost, _) in layer.items() if key[2] >= required]
        if finals:
            best_key = min(finals, key=lambda item: item[0])[1]

    if best_key is not None:
        spot, on_demand = [0] * horizon, [0] * horizon
        record_index = layer[best_key][1]
        for t in range(horizon - 1, -1, -1):
            record_index, spot[t], on_demand[t] = parents[t][record_index]
        solution = _solution(instance, spot, on_demand, nodes)
    elif incumbent is not None:
        solution = _solution(instance, incumbent[0], incumbent[1], nodes)
    else:
        raise InfeasibleError("no schedule reaches the availability target")

    logger.info("Exact solve: objective %.3f after %d nodes", solution.objective, nodes)
    return solution


def brute_force(instance: OmniscientInstance, budget: int = BRUTE_FORCE_BUDGET) -> OmniscientSolution:
    """Exhaustive search over every (S(t), O(t)) schedule; a test oracle for tiny instances."""
    horizon = instance.horizon
    spot_limits = _spot_limits(instance)
    od_limit = instance.od_limit
    spot_count = int(np.prod([int(limit) + 1 for limit in spot_limits], dtype=float))
    od_count = (od_limit + 1) ** horizon
    if spot_count * od_count > budget:
        raise SolverBudgetError(
            f"{spot_count * od_count} schedules exceed the brute-force budget {budget}"
        )

    spot = np.array(list(itertools.product(*[range(int(limit) + 1) for limit in spot_limits])),
                    dtype=np.int64).reshape(-1, horizon)
    on_demand = np.array(list(itertools.product(range(od_limit + 1), repeat=horizon)),
                         dtype=np.int64).reshape(-1, horizon)

    targets = np.asarray(instance.n_tar, dtype=np.int64)
    covered = (_window_minima(spot, instance)[:, None, :]
               + _window_minima(on_demand, instance)[None, :, :]) >= targets
    feasible = covered.sum(axis=2) >= instance.required_ticks
    cost = spot.sum(axis=1)[:, None] + instance.k * on_demand.sum(axis=1)[None, :]
    cost = np.where(feasible, cost, np.inf)

    flat = int(np.argmin(cost))
    if not np.isfinite(cost.flat[flat]):
        raise InfeasibleError("no schedule reaches the availability target")
    spot_index, od_index = np.unravel_index(flat, cost.shape)
    return _solution(instance, spot[spot_index].tolist(), on_demand[od_index].tolist(),
                     nodes=spot_count * od_count)


def evaluate_solution(instance: OmniscientInstance, schedule: OmniscientSchedule) -> SolutionEvaluation:
    """Check a schedule against every constraint of the instance.

    S_r, O_r and M are derived as the largest values the launches allow, so
    a schedule is infeasible only if no choice of them works.
    """
    trace = instance.trace
    horizon = instance.horizon
    if len(schedule.spot) != len(trace.zones) or \
            any(len(row) != horizon for row in schedule.spot) or len(schedule.on_demand) != horizon:
        raise DomainError("schedule dimensions do not match the instance")
    if any(v < 0 for row in schedule.spot for v in row) or any(v < 0 for v in schedule.on_demand):
        raise DomainError("launch counts must be non-negative")

    totals = schedule.spot_totals()
    spot_ready, od_ready, met = _readiness(instance, totals, schedule.on_demand)

    values: Dict[str, float] = {}
    for row, zone in enumerate(trace.zones):
        for t in range(horizon):
            values[f"S[{zone.id},{t}]"] = schedule.spot[row][t]
    for t in range(horizon):
        values[f"O[{t}]"] = schedule.on_demand[t]
        values[f"Sr[{t}]"] = spot_ready[t]
        values[f"Or[{t}]"] = od_ready[t]
        values[f"M[{t}]"] = met[t]

    constraints = instance.constraints or _constraints(instance)
    violations = [c.name for c in constraints if not c.holds(values)]
    return SolutionEvaluation(
        feasible=not violations,
        objective=float(sum(totals)) + instance.k * float(sum(schedule.on_demand)),
        availability=sum(met) / horizon,
        violations=violations,
    )


def schedule_from_ticks(trace: CapacityTrace, ticks: Sequence[TickRecord]) -> OmniscientSchedule:
    """Launched counts of a simulated run, per zone and tick."""
    return OmniscientSchedule(
        spot=[[tick.per_zone.get(zone.id, 0) for tick in ticks] for zone in trace.zones],
        on_demand=[tick.on_demand for tick in ticks],
    )


def schedule_from_events(trace: CapacityTrace, events: Sequence[Event]) -> OmniscientSchedule:
    """Rebuild launched counts from an event log: live from launch up to the end tick."""
    horizon = trace.horizon
    launched: Dict[int, Tuple[int, str, ReplicaKind]] = {}
    ended: Dict[int, int] = {}
    for event in events:
        if event.replica is None:
            continue
        if event.event == EventKind.LAUNCHED:
            launched[event.replica] = (event.t, event.zone, event.kind)
        elif event.event in (EventKind.PREEMPTED, EventKind.TERMINATED):
            ended[event.replica] = event.t

    spot = np.zeros((len(trace.zones), horizon), dtype=np.int64)
    on_demand = np.zeros(horizon, dtype=np.int64)
    for replica_id, (start, zone_id, kind) in launched.items():
        end = min(ended.get(replica_id, horizon), horizon)
        if kind == ReplicaKind.SPOT:
            spot[trace.zone_index(zone_id), start:end] += 1
        else:
            on_demand[start:end] += 1
    return OmniscientSchedule(spot=spot.tolist(), on_demand=on_demand.tolist())
