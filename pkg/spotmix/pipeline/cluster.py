"""Replica lifecycle state machine driven by a capacity trace."""

import logging
from typing import Dict, List, Optional

from ..errors import SpotmixError, ZoneLookupError
from ..models.cluster import (
    BillingLedger, ClusterCounts, Event, EventKind, Replica, ReplicaKind, ReplicaState
)
from ..models.policy import ScalingDecision
from ..models.trace import CapacityTrace
from ..rng import substream

logger = logging.getLogger(__name__)


class ClusterState:
    """All replicas of one run, the current tick and the event log.

    Tick t starts with step() (readiness, then preemption against C(z,t)); the
    policy's decision is applied afterwards with apply(). Launch failures and
    zero-delay readiness that happen during apply() are reported by the next
    step() so the policy sees them before its next decision.
    """

    def __init__(self, trace: CapacityTrace, cold_start_ticks: int, seed: int,
                 od_capacity: Optional[int] = None):
        if cold_start_ticks < 0:
            raise SpotmixError("cold start delay must be non-negative")
        self.trace = trace
        self.cold_start_d = cold_start_ticks
        self.rng_seed = seed
        self.od_capacity = od_capacity
        self.t = 0
        self.replicas: Dict[int, Replica] = {}
        self.events: List[Event] = []

        self._live: Dict[int, Replica] = {}
        self._next_id = 0
        self._deferred: List[Event] = []
        self._victim_rng = substream(seed, "victim")
        self._od_zone = min(trace.zones, key=lambda zone: (zone.od_unit_cost, zone.id)).id

    def launch(self, kind: ReplicaKind, zone: Optional[str] = None) -> Optional[int]:
        """Request one replica; returns its id, or None when provisioning fails.

        On-demand launches ignore `zone` and use the cheapest on-demand zone.
        """
        if kind == ReplicaKind.ON_DEMAND:
            zone = self._od_zone if zone is None else zone
        if zone is None:
            raise ZoneLookupError("spot launches need a zone")
        self.trace.zone_index(zone)

        if self._launch_blocked(kind, zone):
            self._record(EventKind.LAUNCH_FAILED, None, zone, kind, deferred=True)
            return None

        replica = Replica(id=self._next_id, kind=kind, zone=zone, launched_at=self.t)
        self._next_id += 1
        self.replicas[replica.id] = replica
        self._live[replica.id] = replica
        self._record(EventKind.LAUNCHED, replica.id, zone, kind)

        if self.cold_start_d == 0:
            replica.state = ReplicaState.READY
            replica.ready_at = self.t
            self._record(EventKind.BECAME_READY, replica.id, zone, kind, deferred=True)
        return replica.id

    def _launch_blocked(self, kind: ReplicaKind, zone: str) -> bool:
        if kind == ReplicaKind.SPOT:
            live = sum(1 for r in self._live.values() if r.kind == kind and r.zone == zone)
            return live >= self.trace.capacity_at(zone, self.t)
        if self.od_capacity is None:
            return False
        live = sum(1 for r in self._live.values() if r.kind == kind)
        return live >= self.od_capacity

    def step(self) -> List[Event]:
        """Advance one tick and return what the policy should observe."""
        if self.t + 1 >= self.trace.horizon:
            raise ZoneLookupError(f"cannot step past horizon {self.trace.horizon}")
        self.t += 1
        observed = [e for e in self._deferred if e.event == EventKind.BECAME_READY]
        failures = [e for e in self._deferred if e.event == EventKind.LAUNCH_FAILED]
        self._deferred = []

        for replica in sorted(self._live.values(), key=lambda r: r.id):
            if replica.state == ReplicaState.PROVISIONING and \
                    replica.launched_at + self.cold_start_d <= self.t:
                replica.state = ReplicaState.READY
                replica.ready_at = self.t
                observed.append(self._record(EventKind.BECAME_READY, replica.id, replica.zone, replica.kind))

        for zone in self.trace.zones:
            observed.extend(self._enforce_capacity(zone.id))

        return observed + failures

    def _enforce_capacity(self, zone_id: str) -> List[Event]:
        """Preempt seeded-random victims until live spot fits C(z,t)."""
        spot = sorted(
            (r for r in self._live.values() if r.kind == ReplicaKind.SPOT and r.zone == zone_id),
            key=lambda r: r.id,
        )
        excess = len(spot) - self.trace.capacity_at(zone_id, self.t)
        if excess <= 0:
            return []
        picks = self._victim_rng.choice(len(spot), size=excess, replace=False)
        events = []
        for index in sorted(int(i) for i in picks):
            victim = spot[index]
            self._end(victim, ReplicaState.PREEMPTED)
            events.append(self._record(EventKind.PREEMPTED, victim.id, victim.zone, victim.kind))
        return events

    def terminate(self, replica_id: int):
        replica = self._live.get(replica_id)
        if replica is None:
            raise SpotmixError(f"replica {replica_id} is not live")
        self._end(replica, ReplicaState.TERMINATED)
        self._record(EventKind.TERMINATED, replica.id, replica.zone, replica.kind)

    def apply(self, decision: ScalingDecision) -> List[Optional[int]]:
        """Terminations first, then spot launches, then on-demand launches."""
        for replica_id in decision.terminate:
            self.terminate(replica_id)
        launched = [self.launch(ReplicaKind.SPOT, zone) for zone in decision.spot_launches]
        launched += [self.launch(ReplicaKind.ON_DEMAND) for _ in range(decision.od_launches)]
        return launched

    def _end(self, replica: Replica, state: ReplicaState):
        replica.state = state
        replica.ended_at = self.t
        del self._live[replica.id]

    def _record(self, kind: EventKind, replica_id: Optional[int], zone: str,
                replica_kind: ReplicaKind, deferred: bool = False) -> Event:
        event = Event(t=self.t, event=kind, replica=replica_id, zone=zone, kind=replica_kind)
        self.events.append(event)
        if deferred:
            self._deferred.append(event)
        return event

    def live_replicas(self) -> List[Replica]:
        return sorted(self._live.values(), key=lambda r: r.id)

    def counts(self) -> ClusterCounts:
        counts = ClusterCounts(per_zone={zone.id: 0 for zone in self.trace.zones})
        for replica in self._live.values():
            if replica.kind == ReplicaKind.SPOT:
                counts.spot += 1
                counts.spot_ready += replica.ready
                counts.per_zone[replica.zone] += 1
            else:
                counts.on_demand += 1
                counts.on_demand_ready += replica.ready
        return counts

    def bill(self) -> BillingLedger:
        """Every replica is billed from launch up to its end tick (or through now)."""
        ledger = BillingLedger(per_zone={zone.id: 0.0 for zone in self.trace.zones})
        for replica in self.replicas.values():
            end = replica.ended_at if replica.ended_at is not None else self.t + 1
            zone = self.trace.zone(replica.zone)
            if replica.kind == ReplicaKind.SPOT:
                cost = zone.spot_unit_cost * (end - replica.launched_at)
                ledger.spot_cost += cost
            else:
                cost = zone.od_unit_cost * (end - replica.launched_at)
                ledger.od_cost += cost
            ledger.per_zone[replica.zone] += cost
        return ledger
