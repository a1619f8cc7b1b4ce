"""Online policies: SpotHedge and the baselines."""

from typing import List

import pytest

from spotmix.generators.trace_generator import load_trace
from spotmix.models.cluster import ClusterCounts, Event, EventKind, Replica, ReplicaKind, ReplicaState
from spotmix.models.policy import PolicyConfig, PolicyContext, PolicyName, ZoneBook
from spotmix.pipeline.autoscaler import Autoscaler
from spotmix.pipeline.policies import (
    EvenSpreadPolicy, RoundRobinPolicy, SpotHedgePolicy, even_spread_step, even_quotas, make_policy,
    newest_first, round_robin_step, spothedge_step, static_mixture_step, target_on_demand,
)
from spotmix.pipeline.simulator import run_cluster

ZONES = ["z1", "z2", "z3"]
COSTS = {zone: 1.0 for zone in ZONES}


def _replica(replica_id: int, kind: ReplicaKind, zone: str, ready: bool = True, launched_at: int = 0) -> Replica:
    return Replica(
        id=replica_id, kind=kind, zone=zone, launched_at=launched_at,
        state=ReplicaState.READY if ready else ReplicaState.PROVISIONING,
        ready_at=launched_at if ready else None,
    )


def _context(n_tar: int, replicas: List[Replica], t: int = 0) -> PolicyContext:
    counts = ClusterCounts()
    for replica in replicas:
        if replica.kind == ReplicaKind.SPOT:
            counts.spot += 1
            counts.spot_ready += replica.ready
        else:
            counts.on_demand += 1
            counts.on_demand_ready += replica.ready
    return PolicyContext(t=t, n_tar=n_tar, counts=counts, replicas=replicas, zone_costs=COSTS)


def _event(kind: EventKind, zone: str) -> Event:
    return Event(t=1, event=kind, replica=None, zone=zone, kind=ReplicaKind.SPOT)


class TestTargetOnDemand:
    """Test O(t) = min(N_Tar, N_Tar + N_Extra - S_r)."""

    def test_formula(self):
        """Test direct evaluation."""
        assert target_on_demand(4, 1, 3) == 2

    def test_enough_spot(self):
        """Test that S_r >= N_Tar + N_Extra needs no on-demand."""
        assert target_on_demand(4, 1, 5) == 0
        assert target_on_demand(4, 1, 9) == 0

    def test_clamped_at_n_tar(self):
        """Test that no ready spot gives exactly N_Tar."""
        assert target_on_demand(4, 1, 0) == 4

    def test_bounds_over_grid(self):
        """Test the clamp over a grid of inputs."""
        for n_tar in range(6):
            for n_extra in range(4):
                for s_r in range(12):
                    value = target_on_demand(n_tar, n_extra, s_r)
                    assert 0 <= value <= n_tar
                    if s_r >= n_tar + n_extra:
                        assert value == 0


class TestSpotHedgeStep:
    """Test SpotHedge decisions."""

    def test_fresh_start(self):
        """Test 5 spot launches spread over 3 zones plus 4 on-demand."""
        decision = spothedge_step(_context(4, []), ZoneBook.initial(ZONES), PolicyConfig(n_extra=1))
        assert decision.spot_launches == ["z1", "z2", "z3", "z1", "z2"]
        assert decision.od_launches == 4
        assert decision.terminate == []

    def test_terminates_on_demand_when_spot_ready(self):
        """Test that S_r = N_Tar + N_Extra scales on-demand to zero."""
        replicas = [_replica(i, ReplicaKind.SPOT, ZONES[i % 3]) for i in range(5)]
        replicas += [_replica(5, ReplicaKind.ON_DEMAND, "z1"), _replica(6, ReplicaKind.ON_DEMAND, "z1")]
        decision = spothedge_step(_context(4, replicas), ZoneBook.initial(ZONES), PolicyConfig(n_extra=1))
        assert sorted(decision.terminate) == [5, 6]
        assert decision.spot_launches == []

    def test_surplus_spot_newest_first(self):
        """Test that excess spot replicas are terminated newest first."""
        replicas = [_replica(i, ReplicaKind.SPOT, "z1", launched_at=i) for i in range(4)]
        decision = spothedge_step(_context(1, replicas), ZoneBook.initial(ZONES), PolicyConfig(n_extra=1))
        assert sorted(decision.terminate) == [2, 3]

    def test_launches_avoid_preempting_zone(self):
        """Test that launches skip Z_P."""
        book = ZoneBook(available=("z1", "z3"), preempting=("z2",))
        decision = spothedge_step(_context(1, []), book, PolicyConfig(n_extra=1))
        assert decision.spot_launches == ["z1", "z3"]

    def test_failed_launch_moves_zone(self):
        """Test that a failed launch is a preemption signal."""
        policy = SpotHedgePolicy(ZONES, PolicyConfig())
        policy.observe([_event(EventKind.LAUNCH_FAILED, "z2")])
        assert policy.book.preempting == ("z2",)
        policy.observe([_event(EventKind.BECAME_READY, "z2")])
        assert policy.book.preempting == ()

    def test_launch_target_invariant(self):
        """Test that requested spot and on-demand totals match the targets."""
        replicas = [_replica(0, ReplicaKind.SPOT, "z1"), _replica(1, ReplicaKind.SPOT, "z2", ready=False)]
        ctx = _context(3, replicas)
        cfg = PolicyConfig(n_extra=1)
        decision = spothedge_step(ctx, ZoneBook.initial(ZONES), cfg)
        assert len(replicas) + len(decision.spot_launches) == 4
        assert decision.od_launches == target_on_demand(3, 1, 1)


class TestThreeZoneReplay:
    """Test SpotHedge over the committed three-zone fixture."""

    @pytest.fixture
    def replay(self, shift_trace_path):
        trace = load_trace(shift_trace_path)
        cfg = PolicyConfig(name=PolicyName.SPOTHEDGE, n_extra=1, n_tar_override=2)
        cluster, ticks = run_cluster(trace, make_policy(trace.zone_ids, cfg), Autoscaler(cfg, [], 2),
                                     cold_start_ticks=1, seed=0)
        return trace, cluster, ticks

    def test_unavailable_zone_fails_first(self, replay):
        """Test that the zone without capacity at the start reports a failed launch."""
        _, cluster, _ = replay
        failed = [e for e in cluster.events if e.event == EventKind.LAUNCH_FAILED and e.t == 0]
        assert [e.zone for e in failed] == ["aws:us-east-1b"]

    def test_no_spot_in_zone_before_capacity(self, replay):
        """Test that no spot replica lands in zone b before its capacity returns."""
        _, cluster, _ = replay
        launched_b = [e for e in cluster.events
                      if e.event == EventKind.LAUNCHED and e.zone == "aws:us-east-1b"]
        assert launched_b
        assert min(e.t for e in launched_b) >= 60

    def test_narrated_preemptions(self, replay):
        """Test that zone c and then zone a lose their replicas."""
        _, cluster, _ = replay
        preempted = [(e.t, e.zone) for e in cluster.events if e.event == EventKind.PREEMPTED]
        assert preempted[0] == (40, "aws:us-east-1c")
        assert preempted.count((80, "aws:us-east-1a")) == 2

    def test_fallback_tracks_formula(self, replay):
        """Test O(t) against the fallback formula at every tick."""
        _, _, ticks = replay
        for tick in ticks:
            assert tick.on_demand == target_on_demand(2, 1, tick.spot_ready_seen)
            assert tick.on_demand <= tick.n_tar

    def test_zone_a_empty_at_end(self, replay):
        """Test the final placement after zone a drops to zero."""
        _, _, ticks = replay
        assert ticks[-1].per_zone["aws:us-east-1a"] == 0
        assert ticks[-1].spot == 3


class TestEvenSpreadStep:
    """Test the static even spread baseline."""

    def test_two_per_zone(self):
        """Test n=6 over 3 zones."""
        decision = even_spread_step(_context(6, []), ZONES, PolicyConfig())
        assert decision.spot_launches == ["z1", "z1", "z2", "z2", "z3", "z3"]
        assert decision.od_launches == 0

    def test_quotas_uneven(self):
        """Test ceil/floor quotas."""
        assert even_quotas(ZONES, 4) == {"z1": 2, "z2": 1, "z3": 1}

    def test_relaunch_in_original_zone(self):
        """Test that a lost replica comes back in its zone."""
        replicas = [_replica(0, ReplicaKind.SPOT, "z1"), _replica(2, ReplicaKind.SPOT, "z3")]
        decision = even_spread_step(_context(3, replicas), ZONES, PolicyConfig())
        assert decision.spot_launches == ["z2"]

    def test_dead_zone_keeps_failing(self, trace_factory):
        """Test repeated failed launches into a zone with no capacity."""
        trace = trace_factory({"z1": [2] * 50, "z2": [0] * 50})
        cfg = PolicyConfig(name=PolicyName.EVEN_SPREAD, n_tar_override=2)
        cluster, _ = run_cluster(trace, make_policy(trace.zone_ids, cfg), Autoscaler(cfg, [], 2),
                                 cold_start_ticks=2, seed=0)
        failures = [e for e in cluster.events if e.event == EventKind.LAUNCH_FAILED]
        assert len(failures) == 50
        assert all(e.zone == "z2" for e in failures)


class TestRoundRobinStep:
    """Test cyclic relaunches."""

    def test_relaunch_in_next_zone(self):
        """Test that 3 sequential preemptions relaunch in z2, z3, z1."""
        policy = RoundRobinPolicy(ZONES, PolicyConfig())
        survivors = [_replica(10, ReplicaKind.SPOT, "z3")]
        placed = []
        for lost in ("z1", "z2", "z3"):
            policy.observe([_event(EventKind.PREEMPTED, lost)])
            decision = round_robin_step(_context(2, survivors), policy)
            placed.extend(decision.spot_launches)
        assert placed == ["z2", "z3", "z1"]

    def test_single_zone_like_even_spread(self):
        """Test that one zone degenerates to the static spread."""
        ctx = _context(3, [])
        rr = round_robin_step(ctx, RoundRobinPolicy(["z1"], PolicyConfig()))
        even = even_spread_step(ctx, ["z1"], PolicyConfig())
        assert rr.spot_launches == even.spot_launches == ["z1", "z1", "z1"]

    def test_occupancy_uniform_over_homogeneous_zones(self, trace_factory):
        """Test that long-run occupancy is even across identical zones."""
        import numpy as np
        rng = np.random.default_rng(1)
        capacity = {}
        for zone in ZONES:
            row = np.full(20_000, 3)
            row[rng.random(20_000) < 0.02] = 0
            capacity[zone] = row.tolist()
        trace = trace_factory(capacity)
        cfg = PolicyConfig(name=PolicyName.ROUND_ROBIN, n_tar_override=3)
        _, ticks = run_cluster(trace, make_policy(trace.zone_ids, cfg), Autoscaler(cfg, [], 3),
                               cold_start_ticks=0, seed=2)
        totals = {zone: sum(t.per_zone[zone] for t in ticks) for zone in ZONES}
        mean = sum(totals.values()) / 3
        assert all(abs(total - mean) / mean < 0.15 for total in totals.values())


class TestStaticMixtureStep:
    """Test fixed node pools."""

    def test_asg_shape(self):
        """Test 1 on-demand plus 4 spot."""
        cfg = PolicyConfig(spot_pool=4, od_pool=1)
        decision = static_mixture_step(_context(2, []), ZONES, cfg)
        assert len(decision.spot_launches) == 4
        assert decision.od_launches == 1

    def test_no_od_scale_up_without_spot(self, trace_factory):
        """Test that unobtainable spot never adds on-demand replicas."""
        trace = trace_factory({"z1": [0] * 30, "z2": [0] * 30})
        cfg = PolicyConfig(name=PolicyName.STATIC_MIXTURE, spot_pool=4, od_pool=1, n_tar_override=2)
        cluster, ticks = run_cluster(trace, make_policy(trace.zone_ids, cfg), Autoscaler(cfg, [], 2),
                                     cold_start_ticks=1, seed=0)
        assert all(t.on_demand == 1 for t in ticks)
        assert sum(1 for e in cluster.events if e.event == EventKind.LAUNCH_FAILED) == 4 * 30

    def test_pure_spot_pool(self):
        """Test n_o = 0."""
        decision = static_mixture_step(_context(2, []), ZONES, PolicyConfig(spot_pool=3, od_pool=0))
        assert decision.od_launches == 0
        assert len(decision.spot_launches) == 3


class TestOnDemandOnly:
    """Test the cost reference policy."""

    def test_holds_n_tar_on_demand(self):
        """Test N_Tar on-demand and no spot."""
        policy = make_policy(ZONES, PolicyConfig(name=PolicyName.OD_ONLY))
        replicas = [_replica(0, ReplicaKind.SPOT, "z1")]
        decision = policy.decide(_context(2, replicas))
        assert decision.od_launches == 2
        assert decision.terminate == [0]


class TestHelpers:
    """Test newest-first selection."""

    def test_newest_first(self):
        """Test ordering by launch tick, then id."""
        replicas = [_replica(i, ReplicaKind.SPOT, "z1", launched_at=t) for i, t in enumerate([3, 1, 3, 0])]
        assert newest_first(replicas, 2) == [2, 0]
        assert newest_first(replicas, 0) == []

    def test_even_spread_sorts_zones(self):
        """Test that zone order does not depend on input order."""
        assert EvenSpreadPolicy(["z3", "z1", "z2"], PolicyConfig()).zone_ids == ZONES
