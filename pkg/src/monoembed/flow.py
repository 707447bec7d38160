"""Exact maximum flow on small networks with arbitrary-precision integer capacities.

Dinic's algorithm over adjacency lists.  Capacities are Python ints, so
rational inputs scaled by a common denominator never overflow or round.
"""
from __future__ import annotations

from collections import deque


class FlowNetwork:
    """Directed flow network; edges carry exact integer capacities."""

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        # Edge arrays: to[e], cap[e] (residual), with e^1 the reverse edge.
        self.head: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int) -> int:
        """Add u -> v with the given capacity; returns the edge index."""
        if capacity < 0:
            raise ValueError("negative capacity")
        e = len(self.to)
        self.head[u].append(e)
        self.to.append(v)
        self.cap.append(capacity)
        self.head[v].append(e + 1)
        self.to.append(u)
        self.cap.append(0)
        return e

    def flow_on(self, e: int) -> int:
        """Flow routed along edge e (the residual on its reverse arc)."""
        return self.cap[e ^ 1]

    def max_flow(self, s: int, t: int) -> int:
        to, cap, head = self.to, self.cap, self.head
        total = 0
        n = self.num_nodes
        while True:
            level = [-1] * n
            level[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for e in head[u]:
                    v = to[e]
                    if cap[e] > 0 and level[v] < 0:
                        level[v] = level[u] + 1
                        queue.append(v)
            if level[t] < 0:
                return total
            it = [0] * n
            while True:
                pushed = self._dfs_blocking(s, t, level, it)
                if pushed == 0:
                    break
                total += pushed

    def _dfs_blocking(self, s: int, t: int, level: list[int], it: list[int]) -> int:
        # Iterative DFS for one augmenting path in the level graph.
        to, cap, head = self.to, self.cap, self.head
        path: list[int] = []
        u = s
        while True:
            if u == t:
                bottleneck = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= bottleneck
                    cap[e ^ 1] += bottleneck
                return bottleneck
            advanced = False
            while it[u] < len(head[u]):
                e = head[u][it[u]]
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if advanced:
                continue
            level[u] = -1
            if not path:
                return 0
            e = path.pop()
            u = to[e ^ 1]
            it[u] += 1

    def min_cut_source_side(self, s: int) -> set[int]:
        """Vertices reachable from s in the residual graph (call after max_flow)."""
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen
