"""Undirected topologies, all-pairs hop distances and structural metrics.

The balance clustering metric (BCM) is the sample standard deviation of the
row sums of the hop matrix: a topology in which every node has the same total
hop distance to all other nodes scores 0.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import (
    DegenerateTopology,
    DisconnectedTopology,
    DuplicateEdge,
    InvalidEdge,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Topology:
    """A simple undirected graph on nodes ``0 .. node_count-1``.

    ``edges`` is kept normalized: every pair has ``u < v`` and the tuple is
    sorted. Use :func:`build_topology` to construct one from raw input.
    """

    node_count: int
    edges: tuple[Edge, ...]

    @property
    def link_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def is_connected(self) -> bool:
        return _bfs(self.neighbors, 0).count(math.inf) == 0 if self.node_count else True

    def relabel(self, perm) -> Topology:
        """Return the isomorphic topology with node ``i`` renamed ``perm[i]``."""
        return build_topology(self.node_count, [(perm[u], perm[v]) for u, v in self.edges])

    def with_edges(self, remove: Iterable[Edge] = (), add: Iterable[Edge] = ()) -> Topology:
        """Copy with some edges removed and others added (no validation of presence)."""
        edges = set(self.edges)
        edges.difference_update(_norm(u, v) for u, v in remove)
        edges.update(_norm(u, v) for u, v in add)
        return Topology(self.node_count, tuple(sorted(edges)))

    def induced(self, nodes: Iterable[int]) -> Topology:
        """Subgraph induced by ``nodes``, relabelled to ``0..k-1`` in sorted order."""
        keep = sorted(set(nodes))
        index = {n: i for i, n in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Topology(len(keep), tuple(sorted(edges)))


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def build_topology(node_count: int, edges: Iterable[tuple[int, int]]) -> Topology:
    """Validate raw edges and return a normalized :class:`Topology`."""
    if node_count < 1:
        raise InvalidEdge(f"node_count must be >= 1, got {node_count}")
    seen: set[Edge] = set()
    for raw in edges:
        u, v = (int(x) for x in raw)
        if u == v:
            raise InvalidEdge(f"self-loop at node {u}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise InvalidEdge(f"edge ({u}, {v}) has an endpoint outside [0, {node_count})")
        e = _norm(u, v)
        if e in seen:
            raise DuplicateEdge(f"duplicate edge {e}")
        seen.add(e)
    return Topology(node_count, tuple(sorted(seen)))


def _bfs(neighbors, source: int) -> list:
    dist = [math.inf] * len(neighbors)
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in neighbors[x]:
            if dist[y] == math.inf:
                dist[y] = dx
                queue.append(y)
    return dist


@dataclass(frozen=True)
class HopMatrix:
    """All-pairs minimum hop counts; unreachable pairs hold ``inf``."""

    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @cached_property
    def row_sums(self) -> np.ndarray:
        return self.dist.sum(axis=1)

    @cached_property
    def reachable(self) -> bool:
        return bool(np.isfinite(self.dist).all())

    def __eq__(self, other):
        if not isinstance(other, HopMatrix):
            return NotImplemented
        return self.dist.shape == other.dist.shape and bool(np.array_equal(self.dist, other.dist))

    __hash__ = None


def hop_matrix(t: Topology) -> HopMatrix:
    """Breadth-first search from every node."""
    nb = t.neighbors
    dist = np.array([_bfs(nb, s) for s in range(t.node_count)], dtype=float)
    dist.setflags(write=False)
    return HopMatrix(dist)


def _require_metric_ready(m: HopMatrix) -> None:
    if not m.reachable:
        raise DisconnectedTopology("topology is disconnected; hop distances are infinite")
    if m.n < 2:
        raise DegenerateTopology("metrics need at least two nodes")


def bcm_from_row_sums(row_sums) -> float:
    lam = np.asarray(row_sums, dtype=float)
    n = lam.size
    if n < 2:
        raise DegenerateTopology("BCM needs at least two nodes")
    mean = lam.sum() / n
    return math.sqrt(float(((lam - mean) ** 2).sum()) / (n - 1))


def bcm(m: HopMatrix) -> float:
    """Balance clustering metric: sample std. deviation of the hop-matrix row sums."""
    _require_metric_ready(m)
    return bcm_from_row_sums(m.row_sums)


def topology_bcm(t: Topology) -> float:
    return bcm(hop_matrix(t))


def clustering_coefficient(t: Topology) -> float:
    """Node-averaged clustering; nodes of degree < 2 contribute 0."""
    if t.node_count == 0:
        return 0.0
    edge_set = t.edge_set
    total = 0.0
    for nbrs in t.neighbors:
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(
            1
            for i in range(k)
            for j in range(i + 1, k)
            if (nbrs[i], nbrs[j]) in edge_set
        )
        total += links / (k * (k - 1) / 2)
    return total / t.node_count


@dataclass(frozen=True)
class TopologyStats:
    node_count: int
    link_count: int
    bcm: float
    avg_path_length: float
    total_distance: int
    diameter: int
    avg_degree_undirected: float
    links_per_node: float
    clustering_coefficient: float
    arithmetic_mean_row_sum: float


def topology_stats(t: Topology, m: HopMatrix | None = None) -> TopologyStats:
    if m is None:
        m = hop_matrix(t)
    _require_metric_ready(m)
    n = m.n
    total = int(m.dist.sum())
    return TopologyStats(
        node_count=t.node_count,
        link_count=t.link_count,
        bcm=bcm(m),
        avg_path_length=total / (n * (n - 1)),
        total_distance=total,
        diameter=int(m.dist.max()),
        avg_degree_undirected=2 * t.link_count / n,
        # the "Avg. degree" reported for published topology tables is L/N
        links_per_node=t.link_count / n,
        clustering_coefficient=clustering_coefficient(t),
        arithmetic_mean_row_sum=float(m.row_sums.mean()),
    )


def adjacency_from_hop_matrix(m: HopMatrix) -> Topology:
    n = m.n
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if m.dist[i, j] == 1]
    return Topology(n, tuple(edges))
