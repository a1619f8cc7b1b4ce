"""Online scaling policies: SpotHedge and the baselines it is compared against."""

from collections import Counter
from typing import Dict, List, Sequence, Type

from ..errors import ConfigError
from ..models.cluster import Event, EventKind, Replica, ReplicaKind
from ..models.policy import PolicyConfig, PolicyContext, PolicyName, ScalingDecision, ZoneBook
from .placement import handle_launch, handle_preemption, select_next_zone


def target_on_demand(n_tar: int, n_extra: int, s_r: int) -> int:
    """Dynamic fallback: O(t) = min(N_Tar, N_Tar + N_Extra - S_r), never negative."""
    return max(0, min(n_tar, n_tar + n_extra - s_r))


def newest_first(replicas: Sequence[Replica], count: int) -> List[int]:
    """Ids of the `count` most recently launched replicas."""
    ordered = sorted(replicas, key=lambda r: (r.launched_at, r.id), reverse=True)
    return [r.id for r in ordered[:max(0, count)]]


def even_quotas(zone_ids: Sequence[str], n: int) -> Dict[str, int]:
    """ceil(n/N) for the first n mod N zones, floor(n/N) for the rest."""
    base, extra = divmod(n, len(zone_ids))
    return {zone: base + (1 if index < extra else 0) for index, zone in enumerate(zone_ids)}


def _split(replicas: Sequence[Replica]):
    spot = [r for r in replicas if r.kind == ReplicaKind.SPOT]
    on_demand = [r for r in replicas if r.kind == ReplicaKind.ON_DEMAND]
    return spot, on_demand


def _hold_on_demand(on_demand: Sequence[Replica], target: int, decision: ScalingDecision):
    if len(on_demand) < target:
        decision.od_launches = target - len(on_demand)
    elif len(on_demand) > target:
        decision.terminate.extend(newest_first(on_demand, len(on_demand) - target))


class Policy:
    """Base policy: observe() the events of a tick, then decide()."""

    name: PolicyName

    def __init__(self, zone_ids: Sequence[str], cfg: PolicyConfig):
        if not zone_ids:
            raise ConfigError("a policy needs at least one zone")
        self.zone_ids = list(zone_ids)
        self.cfg = cfg

    def observe(self, events: Sequence[Event]):
        pass

    def decide(self, ctx: PolicyContext) -> ScalingDecision:
        raise NotImplementedError


class SpotHedgePolicy(Policy):
    """Dynamic placement plus dynamic on-demand fallback with N_Extra overprovisioning."""

    name = PolicyName.SPOTHEDGE

    def __init__(self, zone_ids: Sequence[str], cfg: PolicyConfig):
        super().__init__(zone_ids, cfg)
        self.book = ZoneBook.initial(self.zone_ids)

    def observe(self, events: Sequence[Event]):
        for event in events:
            if event.kind != ReplicaKind.SPOT:
                continue
            # A failed launch counts as a preemption signal for its zone
            if event.event in (EventKind.PREEMPTED, EventKind.LAUNCH_FAILED):
                self.book = handle_preemption(self.book, event.zone)
            elif event.event == EventKind.BECAME_READY:
                self.book = handle_launch(self.book, event.zone)

    def decide(self, ctx: PolicyContext) -> ScalingDecision:
        decision = ScalingDecision()
        spot, on_demand = _split(ctx.replicas)
        spot_target = ctx.n_tar + self.cfg.n_extra

        if len(spot) < spot_target:
            occupancy = Counter(r.zone for r in spot)
            for _ in range(spot_target - len(spot)):
                zone = select_next_zone(self.book, occupancy.elements(), ctx.zone_costs)
                occupancy[zone] += 1
                decision.spot_launches.append(zone)
        elif len(spot) > spot_target:
            decision.terminate.extend(newest_first(spot, len(spot) - spot_target))

        od_target = target_on_demand(ctx.n_tar, self.cfg.n_extra, ctx.counts.spot_ready)
        _hold_on_demand(on_demand, od_target, decision)
        return decision


class EvenSpreadPolicy(Policy):
    """Static spread of N_Tar spot replicas; preempted replicas come back in their own zone."""

    name = PolicyName.EVEN_SPREAD

    def __init__(self, zone_ids: Sequence[str], cfg: PolicyConfig):
        super().__init__(sorted(zone_ids), cfg)

    def spot_count(self, ctx: PolicyContext) -> int:
        return ctx.n_tar

    def od_count(self, ctx: PolicyContext) -> int:
        return 0

    def decide(self, ctx: PolicyContext) -> ScalingDecision:
        decision = ScalingDecision()
        spot, on_demand = _split(ctx.replicas)
        quotas = even_quotas(self.zone_ids, self.spot_count(ctx))
        for zone in self.zone_ids:
            in_zone = [r for r in spot if r.zone == zone]
            if len(in_zone) < quotas[zone]:
                decision.spot_launches.extend([zone] * (quotas[zone] - len(in_zone)))
            elif len(in_zone) > quotas[zone]:
                decision.terminate.extend(newest_first(in_zone, len(in_zone) - quotas[zone]))
        _hold_on_demand(on_demand, self.od_count(ctx), decision)
        return decision


class StaticMixturePolicy(EvenSpreadPolicy):
    """Fixed node pools: od_pool on-demand plus spot_pool spot, whatever the spot market does."""

    name = PolicyName.STATIC_MIXTURE

    def spot_count(self, ctx: PolicyContext) -> int:
        return self.cfg.spot_pool

    def od_count(self, ctx: PolicyContext) -> int:
        return self.cfg.od_pool


class RoundRobinPolicy(Policy):
    """Relaunches go to the zone after the one that lost a replica, cyclically."""

    name = PolicyName.ROUND_ROBIN

    def __init__(self, zone_ids: Sequence[str], cfg: PolicyConfig):
        super().__init__(sorted(zone_ids), cfg)
        self.cursor = 0

    def observe(self, events: Sequence[Event]):
        for event in events:
            if event.kind == ReplicaKind.SPOT and \
                    event.event in (EventKind.PREEMPTED, EventKind.LAUNCH_FAILED):
                self.cursor = (self.zone_ids.index(event.zone) + 1) % len(self.zone_ids)

    def decide(self, ctx: PolicyContext) -> ScalingDecision:
        decision = ScalingDecision()
        spot, on_demand = _split(ctx.replicas)
        if len(spot) < ctx.n_tar:
            for _ in range(ctx.n_tar - len(spot)):
                decision.spot_launches.append(self.zone_ids[self.cursor])
                self.cursor = (self.cursor + 1) % len(self.zone_ids)
        elif len(spot) > ctx.n_tar:
            decision.terminate.extend(newest_first(spot, len(spot) - ctx.n_tar))
        _hold_on_demand(on_demand, 0, decision)
        return decision


class OnDemandOnlyPolicy(Policy):
    """N_Tar on-demand replicas; the cost reference."""

    name = PolicyName.OD_ONLY

    def decide(self, ctx: PolicyContext) -> ScalingDecision:
        decision = ScalingDecision()
        spot, on_demand = _split(ctx.replicas)
        decision.terminate.extend(r.id for r in spot)
        _hold_on_demand(on_demand, ctx.n_tar, decision)
        return decision


POLICIES: Dict[PolicyName, Type[Policy]] = {
    PolicyName.SPOTHEDGE: SpotHedgePolicy,
    PolicyName.EVEN_SPREAD: EvenSpreadPolicy,
    PolicyName.ROUND_ROBIN: RoundRobinPolicy,
    PolicyName.STATIC_MIXTURE: StaticMixturePolicy,
    PolicyName.OD_ONLY: OnDemandOnlyPolicy,
}


def make_policy(zone_ids: Sequence[str], cfg: PolicyConfig) -> Policy:
    return POLICIES[cfg.name](zone_ids, cfg)


def spothedge_step(ctx: PolicyContext, book: ZoneBook, cfg: PolicyConfig) -> ScalingDecision:
    """One SpotHedge decision for an explicit zone book."""
    policy = SpotHedgePolicy(list(book.zones), cfg)
    policy.book = book
    return policy.decide(ctx)


def even_spread_step(ctx: PolicyContext, zone_ids: Sequence[str], cfg: PolicyConfig) -> ScalingDecision:
    return EvenSpreadPolicy(zone_ids, cfg).decide(ctx)


def round_robin_step(ctx: PolicyContext, policy: RoundRobinPolicy) -> ScalingDecision:
    return policy.decide(ctx)


def static_mixture_step(ctx: PolicyContext, zone_ids: Sequence[str], cfg: PolicyConfig) -> ScalingDecision:
    return StaticMixturePolicy(zone_ids, cfg).decide(ctx)
