"""Replica servers and the request load balancer."""

from collections import deque
from typing import Deque, Dict, List, Optional

from ..models.workload import LoadBalancerMode


class ReplicaServer:
    """A ready replica: `max_concurrency` slots plus a FIFO run queue."""

    def __init__(self, replica_id: int, zone: str, max_concurrency: int, network_latency_s: float = 0.0):
        self.replica_id = replica_id
        self.zone = zone
        self.max_concurrency = max_concurrency
        self.network_latency_s = network_latency_s
        self.queue: Deque[int] = deque()
        self.in_flight: Dict[int, float] = {}

    @property
    def load(self) -> int:
        return len(self.in_flight) + len(self.queue)

    @property
    def has_free_slot(self) -> bool:
        return len(self.in_flight) < self.max_concurrency


class LoadBalancer:
    """Routes requests to ready replicas by round robin or least load."""

    def __init__(self, mode: LoadBalancerMode):
        self.mode = mode
        self.servers: Dict[int, ReplicaServer] = {}
        self._last: Optional[int] = None

    def add(self, server: ReplicaServer):
        self.servers[server.replica_id] = server

    def remove(self, replica_id: int) -> Optional[ReplicaServer]:
        return self.servers.pop(replica_id, None)

    @property
    def ready_ids(self) -> List[int]:
        return sorted(self.servers)

    def route(self) -> Optional[int]:
        """Replica for the next request, or None when nothing is ready."""
        if not self.servers:
            return None
        if self.mode == LoadBalancerMode.ROUND_ROBIN:
            return self._next_round_robin()
        return min(self.servers.values(), key=lambda s: (s.load, s.replica_id)).replica_id

    def _next_round_robin(self) -> int:
        ids = self.ready_ids
        if self._last is not None:
            for replica_id in ids:
                if replica_id > self._last:
                    self._last = replica_id
                    return replica_id
        self._last = ids[0]
        return ids[0]
