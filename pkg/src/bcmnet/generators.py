"""Topology sources: Waxman random graphs, Barabasi-Albert graphs and edge-list files.

Also home to the two-way sub-network partition used for non-uniform traffic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DisconnectedSubnet,
    GenerationFailed,
    InvalidParams,
    ParseError,
    UsageError,
)
from .topology import Topology, bcm, build_topology, hop_matrix

MAX_WAXMAN_ATTEMPTS = 1000


@dataclass(frozen=True)
class WaxmanParams:
    node_count: int
    target_links: int
    alpha: float = 0.15
    beta: float = 0.2
    plane_size: float = 1000.0
    seed: int = 0
    max_attempts: int = MAX_WAXMAN_ATTEMPTS

    def validate(self) -> None:
        n = self.node_count
        if n < 2:
            raise InvalidParams("Waxman graphs need at least 2 nodes")
        if not (0 < self.alpha <= 1 and 0 < self.beta <= 1):
            raise InvalidParams("alpha and beta must lie in (0, 1]")
        if self.plane_size <= 0:
            raise InvalidParams("plane_size must be positive")
        if self.target_links > n * (n - 1) // 2:
            raise InvalidParams(f"{self.target_links} links do not fit on {n} nodes")
        if self.target_links < n - 1:
            raise GenerationFailed(
                f"{self.target_links} links cannot connect {n} nodes (need {n - 1})"
            )


@dataclass(frozen=True)
class BaParams:
    node_count: int
    m: int
    m0: int | None = None  # defaults to m + 1
    seed: int = 0

    @property
    def initial_clique(self) -> int:
        return self.m + 1 if self.m0 is None else self.m0

    def validate(self) -> None:
        m0 = self.initial_clique
        if not (1 <= self.m <= m0 < self.node_count):
            raise InvalidParams(
                f"need 1 <= m <= m0 < node_count, got m={self.m}, m0={m0}, N={self.node_count}"
            )


def generate_waxman(p: WaxmanParams) -> Topology:
    """Waxman graph with exactly ``target_links`` edges, connected.

    Node placements are redrawn until the accepted edge set is connected.
    """
    p.validate()
    rng = np.random.default_rng(p.seed)
    n = p.node_count
    pairs = list(itertools.combinations(range(n), 2))
    for _ in range(p.max_attempts):
        xy = rng.uniform(0.0, p.plane_size, size=(n, 2))
        d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
        d_max = d.max()
        prob = np.array([p.alpha * math.exp(-d[u, v] / (p.beta * d_max)) for u, v in pairs])
        chosen = np.zeros(len(pairs), dtype=bool)
        accepted = 0
        while accepted < p.target_links:
            for k in rng.permutation(len(pairs)):
                if chosen[k] or rng.random() >= prob[k]:
                    continue
                chosen[k] = True
                accepted += 1
                if accepted == p.target_links:
                    break
        t = Topology(n, tuple(pairs[k] for k in np.flatnonzero(chosen)))
        if t.is_connected():
            return t
    raise GenerationFailed(
        f"no connected Waxman graph with N={n}, L={p.target_links} in {p.max_attempts} attempts"
    )


def generate_barabasi_albert(p: BaParams) -> Topology:
    """Preferential attachment grown from an ``m0``-clique."""
    p.validate()
    rng = np.random.default_rng(p.seed)
    m0 = p.initial_clique
    edges = list(itertools.combinations(range(m0), 2))
    # every endpoint appears once per incident edge: uniform draws are degree-proportional
    endpoints = [x for e in edges for x in e]
    for new in range(m0, p.node_count):
        targets: list[int] = []
        while len(targets) < p.m:
            cand = endpoints[int(rng.integers(len(endpoints)))]
            if cand not in targets:
                targets.append(cand)
        for t in targets:
            edges.append((t, new))
            endpoints.extend((t, new))
    return build_topology(p.node_count, edges)


def save_topology(t: Topology, path) -> None:
    lines = [f"{t.node_count} {t.link_count}"]
    lines.extend(f"{u} {v}" for u, v in sorted(t.edges))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_topology(text: str) -> Topology:
    header = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"expected two integers, got {line!r}", lineno) from None
        if header is None:
            if a < 1 or b < 0:
                raise ParseError(f"bad header {line!r}", lineno)
            header = (a, b)
            continue
        if len(edges) == header[1]:
            raise ParseError(f"more edge lines than the {header[1]} declared", lineno)
        if not a < b:
            raise ParseError(f"edge endpoints must satisfy u < v, got {line!r}", lineno)
        edges.append((a, b))
        try:
            build_topology(header[0], [(a, b)])
        except UsageError as exc:
            raise ParseError(str(exc), lineno) from None
    if header is None:
        raise ParseError("missing '<N> <L>' header")
    if len(edges) != header[1]:
        raise ParseError(f"header declares {header[1]} edges but file has {len(edges)}")
    try:
        return build_topology(header[0], edges)
    except UsageError as exc:
        raise ParseError(str(exc)) from None


def load_topology(path) -> Topology:
    return parse_topology(Path(path).read_text())


@dataclass(frozen=True)
class SubnetAssignment:
    labels: tuple[int, ...]
    per_subnet_bcm: tuple[float, float]
    whole_bcm: float

    def members(self, label: int) -> list[int]:
        return [i for i, x in enumerate(self.labels) if x == label]


def assign_subnetworks(t: Topology, labels) -> SubnetAssignment:
    """BCM of each induced sub-network and of the whole topology.

    Links between the two sub-networks are ignored for the per-subnet values.
    """
    labels = tuple(int(x) for x in labels)
    if len(labels) != t.node_count:
        raise InvalidParams(f"expected {t.node_count} labels, got {len(labels)}")
    if set(labels) - {0, 1}:
        raise InvalidParams("subnet labels must be 0 or 1")
    values = []
    for cls in (0, 1):
        nodes = [i for i, x in enumerate(labels) if x == cls]
        if not nodes:
            raise InvalidParams(f"sub-network {cls} is empty")
        sub = t.induced(nodes)
        if not sub.is_connected():
            raise DisconnectedSubnet(f"sub-network {cls} is not connected: {nodes}")
        values.append(bcm(hop_matrix(sub)))
    return SubnetAssignment(labels, (values[0], values[1]), bcm(hop_matrix(t)))


def split_in_two(t: Topology, intra_weight: float = 3.0) -> tuple[int, ...]:
    """Two connected sub-networks whose internal traffic travels few hops.

    Candidate splits come from every pair of centre nodes ``(a, b)``: a
    simultaneous breadth-first search from both centres assigns each node to
    the centre that reaches it first (``a`` on equal distance), so both cells
    are connected. The winner minimizes the mean hop count of traffic in which
    same-cell destinations weigh ``intra_weight`` and others 1; ties prefer
    the more balanced split, then the smallest centre pair. Cells need at
    least two nodes each.
    """
    n = t.node_count
    if n < 4:
        raise DisconnectedSubnet("need at least four nodes to split")
    m = hop_matrix(t)
    if not m.reachable:
        raise DisconnectedSubnet("topology is disconnected")
    dist = m.dist
    best = None
    for a, b in itertools.combinations(range(n), 2):
        owner = [-1] * n
        owner[a], owner[b] = 0, 1
        frontier = [a, b]
        while frontier:
            nxt = []
            for x in frontier:
                for y in t.neighbors[x]:
                    if owner[y] == -1:
                        owner[y] = owner[x]
                        nxt.append(y)
            frontier = nxt
        size1 = sum(owner)
        if size1 < 2 or n - size1 < 2:
            continue
        lab = np.array(owner)
        w = np.where(lab[:, None] == lab[None, :], intra_weight, 1.0)
        np.fill_diagonal(w, 0.0)
        mean_hops = float((w * dist).sum() / w.sum())
        key = (round(mean_hops, 12), abs(n - 2 * size1), a, b)
        if best is None or key < best[0]:
            best = (key, tuple(owner))
    if best is None:
        raise DisconnectedSubnet("no split with two connected cells of size >= 2")
    return best[1]
