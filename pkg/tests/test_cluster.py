"""Replica lifecycle: launch, step, counts and billing."""

import numpy as np
import pytest

from spotmix.errors import ZoneLookupError
from spotmix.models.cluster import EventKind, ReplicaKind, ReplicaState
from spotmix.models.policy import ScalingDecision
from spotmix.pipeline.cluster import ClusterState


def _step_to(cluster: ClusterState, t: int):
    events = []
    while cluster.t < t:
        events.extend(cluster.step())
    return events


class TestLaunch:
    """Test replica launches against zone capacity."""

    def test_launch_with_capacity(self, trace_factory):
        """Test that a launch below capacity provisions a replica."""
        cluster = ClusterState(trace_factory({"z1": [2] * 5}), cold_start_ticks=2, seed=0)
        replica_id = cluster.launch(ReplicaKind.SPOT, "z1")
        assert replica_id == 0
        assert cluster.replicas[0].state == ReplicaState.PROVISIONING

    def test_launch_without_capacity(self, trace_factory):
        """Test that a launch into a full zone fails and is reported next tick."""
        cluster = ClusterState(trace_factory({"z1": [0] * 5}), cold_start_ticks=2, seed=0)
        assert cluster.launch(ReplicaKind.SPOT, "z1") is None
        events = cluster.step()
        assert [(e.event, e.zone, e.t) for e in events] == [(EventKind.LAUNCH_FAILED, "z1", 0)]

    def test_ready_after_cold_start(self, trace_factory):
        """Test that a replica launched at t is ready at t + d."""
        cluster = ClusterState(trace_factory({"z1": [1] * 30}), cold_start_ticks=18, seed=0)
        _step_to(cluster, 2)
        replica_id = cluster.launch(ReplicaKind.SPOT, "z1")
        _step_to(cluster, 19)
        assert cluster.replicas[replica_id].state == ReplicaState.PROVISIONING
        _step_to(cluster, 20)
        assert cluster.replicas[replica_id].ready_at == 20

    def test_zero_delay_ready_immediately(self, trace_factory):
        """Test that d = 0 replicas are ready in their launch tick."""
        cluster = ClusterState(trace_factory({"z1": [1] * 3}), cold_start_ticks=0, seed=0)
        replica_id = cluster.launch(ReplicaKind.SPOT, "z1")
        assert cluster.replicas[replica_id].ready_at == 0
        assert cluster.counts().spot_ready == 1
        events = cluster.step()
        assert [e.event for e in events] == [EventKind.BECAME_READY]

    def test_unknown_zone(self, trace_factory):
        """Test that launching into an unknown zone is an error."""
        cluster = ClusterState(trace_factory({"z1": [1] * 3}), cold_start_ticks=0, seed=0)
        with pytest.raises(ZoneLookupError):
            cluster.launch(ReplicaKind.SPOT, "nowhere")

    def test_on_demand_never_fails(self, trace_factory):
        """Test that on-demand launches ignore spot capacity."""
        cluster = ClusterState(trace_factory({"z1": [0] * 3}), cold_start_ticks=1, seed=0)
        assert all(cluster.launch(ReplicaKind.ON_DEMAND) is not None for _ in range(5))
        assert cluster.counts().on_demand == 5

    def test_on_demand_cap(self, trace_factory):
        """Test the optional on-demand capacity flag."""
        cluster = ClusterState(trace_factory({"z1": [0] * 3}), cold_start_ticks=1, seed=0, od_capacity=1)
        assert cluster.launch(ReplicaKind.ON_DEMAND) is not None
        assert cluster.launch(ReplicaKind.ON_DEMAND) is None


class TestStep:
    """Test readiness and preemption injection."""

    def test_capacity_drop_preempts_excess(self, trace_factory):
        """Test that 3 live spot and C dropping to 1 preempt exactly 2."""
        cluster = ClusterState(trace_factory({"z1": [3, 1, 1]}), cold_start_ticks=0, seed=4)
        for _ in range(3):
            cluster.launch(ReplicaKind.SPOT, "z1")
        events = cluster.step()
        preempted = [e for e in events if e.event == EventKind.PREEMPTED]
        assert len(preempted) == 2
        assert cluster.counts().spot == 1

    def test_constant_capacity_no_events(self, trace_factory):
        """Test that nothing happens without launches or capacity changes."""
        cluster = ClusterState(trace_factory({"z1": [2] * 10}), cold_start_ticks=0, seed=0)
        assert _step_to(cluster, 9) == []

    def test_cannot_step_past_horizon(self, trace_factory):
        """Test that the horizon bounds the simulation."""
        cluster = ClusterState(trace_factory({"z1": [1, 1]}), cold_start_ticks=0, seed=0)
        cluster.step()
        with pytest.raises(ZoneLookupError):
            cluster.step()

    def test_victims_depend_on_seed_only(self, trace_factory):
        """Test that identical inputs give an identical event log."""
        def run(seed):
            cluster = ClusterState(trace_factory({"z1": [6, 2, 2, 0]}), cold_start_ticks=1, seed=seed)
            for _ in range(6):
                cluster.launch(ReplicaKind.SPOT, "z1")
            _step_to(cluster, 3)
            return [e.model_dump() for e in cluster.events]

        assert run(7) == run(7)

    def test_capacity_safety_in_random_run(self, trace_factory):
        """Test that live spot never exceeds C(z,t) after a step."""
        rng = np.random.default_rng(0)
        capacity = {f"z{i}": rng.integers(0, 4, size=200).tolist() for i in range(3)}
        trace = trace_factory(capacity)
        cluster = ClusterState(trace, cold_start_ticks=3, seed=1)
        for t in range(199):
            cluster.step()
            for zone in trace.zone_ids:
                assert cluster.counts().per_zone[zone] <= trace.capacity_at(zone, cluster.t)
            for zone in rng.choice(trace.zone_ids, size=2):
                cluster.launch(ReplicaKind.SPOT, str(zone))


class TestCounts:
    """Test S, S_r, O, O_r bookkeeping."""

    def test_empty_cluster(self, trace_factory):
        """Test that an empty cluster counts zero."""
        counts = ClusterState(trace_factory({"z1": [1]}), cold_start_ticks=0, seed=0).counts()
        assert (counts.spot, counts.spot_ready, counts.on_demand, counts.on_demand_ready) == (0, 0, 0, 0)

    def test_provisioning_and_ready(self, trace_factory):
        """Test 2 provisioning plus 1 ready spot replica."""
        cluster = ClusterState(trace_factory({"z1": [3] * 10}), cold_start_ticks=2, seed=0)
        cluster.launch(ReplicaKind.SPOT, "z1")
        _step_to(cluster, 2)
        cluster.launch(ReplicaKind.SPOT, "z1")
        cluster.launch(ReplicaKind.SPOT, "z1")
        counts = cluster.counts()
        assert counts.spot == 3
        assert counts.spot_ready == 1
        assert counts.per_zone == {"z1": 3}

    def test_counts_match_event_log(self, trace_factory):
        """Test that counts equal a recount from the event log."""
        rng = np.random.default_rng(2)
        trace = trace_factory({f"z{i}": rng.integers(0, 3, size=1000).tolist() for i in range(2)})
        cluster = ClusterState(trace, cold_start_ticks=4, seed=9)
        for t in range(999):
            live = cluster.live_replicas()
            terminate = [r.id for r in live if rng.random() < 0.05]
            launches = [str(z) for z in rng.choice(trace.zone_ids, size=rng.integers(0, 3))]
            cluster.apply(ScalingDecision(spot_launches=launches, od_launches=int(rng.integers(0, 2)),
                                          terminate=terminate))
            cluster.step()

        live, ready = {}, set()
        for event in cluster.events:
            if event.event == EventKind.LAUNCHED:
                live[event.replica] = event.kind
            elif event.event == EventKind.BECAME_READY:
                ready.add(event.replica)
            elif event.event in (EventKind.PREEMPTED, EventKind.TERMINATED):
                live.pop(event.replica)
        counts = cluster.counts()
        assert counts.spot == sum(1 for kind in live.values() if kind == ReplicaKind.SPOT)
        assert counts.on_demand == sum(1 for kind in live.values() if kind == ReplicaKind.ON_DEMAND)
        assert counts.spot_ready == sum(1 for r, kind in live.items() if kind == ReplicaKind.SPOT and r in ready)
        assert counts.on_demand_ready == sum(
            1 for r, kind in live.items() if kind == ReplicaKind.ON_DEMAND and r in ready
        )


class TestBill:
    """Test billing from launch through the end tick."""

    def test_spot_billed_during_cold_start(self, trace_factory):
        """Test 10 ticks alive, 3 of them provisioning, cost 10."""
        cluster = ClusterState(trace_factory({"z1": [1] * 20}), cold_start_ticks=3, seed=0)
        replica_id = cluster.launch(ReplicaKind.SPOT, "z1")
        _step_to(cluster, 10)
        cluster.terminate(replica_id)
        ledger = cluster.bill()
        assert ledger.spot_cost == pytest.approx(10.0)
        assert ledger.od_cost == 0.0

    def test_on_demand_at_k(self, trace_factory):
        """Test one on-demand replica for 10 ticks at k = 3."""
        cluster = ClusterState(trace_factory({"z1": [1] * 20}, k=3.0), cold_start_ticks=3, seed=0)
        replica_id = cluster.launch(ReplicaKind.ON_DEMAND)
        _step_to(cluster, 10)
        cluster.terminate(replica_id)
        assert cluster.bill().od_cost == pytest.approx(30.0)

    def test_live_replica_billed_through_now(self, trace_factory):
        """Test that a live replica is billed including the current tick."""
        cluster = ClusterState(trace_factory({"z1": [1] * 20}, spot_costs={"z1": 0.5}), cold_start_ticks=0, seed=0)
        cluster.launch(ReplicaKind.SPOT, "z1")
        _step_to(cluster, 4)
        ledger = cluster.bill()
        assert ledger.spot_cost == pytest.approx(2.5)
        assert ledger.per_zone == {"z1": pytest.approx(2.5)}

    def test_ledger_matches_per_tick_recount(self, trace_factory):
        """Test the billing identity over a mixed 100-tick run."""
        rng = np.random.default_rng(5)
        trace = trace_factory(
            {"a": rng.integers(0, 3, size=100).tolist(), "b": rng.integers(0, 3, size=100).tolist()},
            spot_costs={"a": 1.0, "b": 1.5}, k=3.0,
        )
        cluster = ClusterState(trace, cold_start_ticks=2, seed=3)
        recount = 0.0
        for t in range(100):
            if t > 0:
                cluster.step()
            live = cluster.live_replicas()
            cluster.apply(ScalingDecision(
                spot_launches=[str(z) for z in rng.choice(["a", "b"], size=rng.integers(0, 3))],
                od_launches=int(rng.integers(0, 2)),
                terminate=[r.id for r in live if rng.random() < 0.1],
            ))
            counts = cluster.counts()
            recount += counts.per_zone["a"] * 1.0 + counts.per_zone["b"] * 1.5 + 3.0 * counts.on_demand
        assert cluster.bill().total == pytest.approx(recount)
