"""Event-driven request execution over a replica timeline."""

import heapq
import itertools
import logging
from collections import deque
from typing import Deque, Dict, List, Optional, Sequence

from ..models.cluster import Replica
from ..models.workload import LoadBalancerMode, Request, RequestOutcome, RequestStatus
from .balancer import LoadBalancer, ReplicaServer

logger = logging.getLogger(__name__)

# Same-time events resolve in this order
COMPLETION, REPLICA_END, REPLICA_READY, ARRIVAL, TIMEOUT = range(5)


class _Attempt:
    __slots__ = ("request", "attempts", "servers", "server", "token", "done")

    def __init__(self, request: Request):
        self.request = request
        self.attempts = 1
        self.servers: List[int] = []
        self.server: Optional[int] = None
        self.token = 0
        self.done = False


class RequestSimulator:
    """Plays requests against the ready intervals of every replica of a run."""

    def __init__(self, replicas: Sequence[Replica], tick_seconds: int, max_concurrency: int = 8,
                 lb_mode: LoadBalancerMode = LoadBalancerMode.LEAST_LOAD,
                 zone_latency_s: Optional[Dict[str, float]] = None, max_attempts: int = 5):
        self.replicas = list(replicas)
        self.tick_seconds = tick_seconds
        self.max_concurrency = max_concurrency
        self.lb_mode = lb_mode
        self.zone_latency_s = zone_latency_s or {}
        self.max_attempts = max_attempts

    def run(self, requests: Sequence[Request]) -> List[RequestOutcome]:
        self._heap: list = []
        self._seq = itertools.count()
        self._balancer = LoadBalancer(self.lb_mode)
        self._pending: Deque[int] = deque()
        self._state: Dict[int, _Attempt] = {}
        self._outcomes: Dict[int, RequestOutcome] = {}

        for replica in self.replicas:
            if replica.ready_at is None:
                continue
            if replica.ended_at is not None and replica.ended_at <= replica.ready_at:
                continue
            self._push(replica.ready_at * self.tick_seconds, REPLICA_READY, replica)
            if replica.ended_at is not None:
                self._push(replica.ended_at * self.tick_seconds, REPLICA_END, replica.id)
        for request in requests:
            self._state[request.id] = _Attempt(request)
            self._push(request.arrival_s, ARRIVAL, request.id)
            self._push(request.deadline_s, TIMEOUT, request.id)

        while self._heap:
            now, kind, _, payload = heapq.heappop(self._heap)
            if kind == COMPLETION:
                self._complete(now, *payload)
            elif kind == REPLICA_END:
                self._replica_end(now, payload)
            elif kind == REPLICA_READY:
                self._replica_ready(now, payload)
            elif kind == ARRIVAL:
                self._dispatch(now, payload)
            else:
                self._timeout(now, payload)

        outcomes = [self._outcomes[request.id] for request in requests]
        logger.info("Simulated %d requests on %d replicas", len(outcomes), len(self.replicas))
        return outcomes

    def _push(self, time: float, kind: int, payload):
        heapq.heappush(self._heap, (time, kind, next(self._seq), payload))

    def _dispatch(self, now: float, request_id: int):
        state = self._state[request_id]
        target = self._balancer.route()
        if target is None:
            state.server = None
            self._pending.append(request_id)
            return
        server = self._balancer.servers[target]
        state.server = target
        state.servers.append(target)
        if server.has_free_slot:
            self._start(now, server, request_id)
        else:
            server.queue.append(request_id)

    def _start(self, now: float, server: ReplicaServer, request_id: int):
        state = self._state[request_id]
        state.token += 1
        finish = now + state.request.service_s + server.network_latency_s
        server.in_flight[request_id] = finish
        self._push(finish, COMPLETION, (request_id, state.token))

    def _fill_slots(self, now: float, server: ReplicaServer):
        while server.queue and server.has_free_slot:
            self._start(now, server, server.queue.popleft())

    def _finish(self, request_id: int, status: RequestStatus, latency: float):
        state = self._state[request_id]
        state.done = True
        self._outcomes[request_id] = RequestOutcome(
            request_id=request_id,
            status=status,
            latency_s=latency,
            attempts=state.attempts,
            service_s=state.request.service_s,
            servers_visited=state.servers,
        )

    def _complete(self, now: float, request_id: int, token: int):
        state = self._state[request_id]
        if state.done or token != state.token or state.server is None:
            return
        server = self._balancer.servers.get(state.server)
        if server is None or request_id not in server.in_flight:
            return
        del server.in_flight[request_id]
        self._finish(request_id, RequestStatus.COMPLETED, now - state.request.arrival_s)
        self._fill_slots(now, server)

    def _timeout(self, now: float, request_id: int):
        state = self._state[request_id]
        if state.done:
            return
        server = self._balancer.servers.get(state.server) if state.server is not None else None
        if server is not None:
            if request_id in server.in_flight:
                del server.in_flight[request_id]
            elif request_id in server.queue:
                server.queue.remove(request_id)
        elif request_id in self._pending:
            self._pending.remove(request_id)
        self._finish(request_id, RequestStatus.TIMED_OUT, state.request.timeout_s)
        if server is not None:
            self._fill_slots(now, server)

    def _replica_ready(self, now: float, replica: Replica):
        server = ReplicaServer(
            replica.id, replica.zone, self.max_concurrency,
            self.zone_latency_s.get(replica.zone, 0.0),
        )
        self._balancer.add(server)
        while self._pending:
            self._dispatch(now, self._pending.popleft())

    def _replica_end(self, now: float, replica_id: int):
        """Preempted or terminated: every request on the replica goes back to the balancer."""
        server = self._balancer.remove(replica_id)
        if server is None:
            return
        displaced = sorted(server.in_flight, key=lambda rid: (server.in_flight[rid], rid))
        displaced += list(server.queue)
        for request_id in displaced:
            state = self._state[request_id]
            state.server = None
            state.token += 1
            state.attempts += 1
            if state.attempts > self.max_attempts:
                state.attempts = self.max_attempts
                self._finish(request_id, RequestStatus.FAILED_FINAL, now - state.request.arrival_s)
            else:
                self._dispatch(now, request_id)


def simulate_requests(replicas: Sequence[Replica], requests: Sequence[Request], tick_seconds: int,
                      max_concurrency: int = 8,
                      lb_mode: LoadBalancerMode = LoadBalancerMode.LEAST_LOAD,
                      zone_latency_s: Optional[Dict[str, float]] = None,
                      max_attempts: int = 5) -> List[RequestOutcome]:
    """Outcome for every request, in request order."""
    simulator = RequestSimulator(replicas, tick_seconds, max_concurrency, lb_mode,
                                 zone_latency_s, max_attempts)
    return simulator.run(requests)
