"""Greedy BCM-lowering link rewiring.

Each step removes one link between nodes with small hop-distance row sums and
adds one link between far-apart nodes with large row sums, keeping the node
count, the link count and connectivity unchanged. A step is only accepted if
it strictly lowers the BCM and, by default, does not lengthen the total hop
distance; otherwise the next-ranked (removal, addition) pair is tried.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import InvalidParams, LocalMinimum, NoAddableEdge, NoRemovableEdge
from .topology import Edge, HopMatrix, Topology, bcm, bcm_from_row_sums, hop_matrix


@dataclass(frozen=True)
class RewireStep:
    removed_edge: Edge
    added_edge: Edge
    bcm_before: float
    bcm_after: float


@dataclass(frozen=True)
class RewireConfig:
    max_steps: int | None = None  # None: 10 * link count
    target_bcm: float = 0.0
    candidate_budget: int = 5000
    keep_path_length: bool = True

    def __post_init__(self):
        for name in ("target_bcm", "candidate_budget"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be nonnegative")
        if self.max_steps is not None and self.max_steps < 0:
            raise InvalidParams("max_steps must be nonnegative")


def bridges(t: Topology) -> set[Edge]:
    """Edges whose removal disconnects the graph (iterative Tarjan low-link)."""
    n = t.node_count
    disc = [-1] * n
    low = [0] * n
    out: set[Edge] = set()
    counter = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack = [(root, -1, iter(t.neighbors[root]))]
        while stack:
            node, parent, it = stack[-1]
            for nxt in it:
                if nxt == parent:
                    continue
                if disc[nxt] == -1:
                    disc[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append((nxt, node, iter(t.neighbors[nxt])))
                    break
                low[node] = min(low[node], disc[nxt])
            else:
                stack.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[node])
                    if low[node] > disc[parent]:
                        out.add((min(node, parent), max(node, parent)))
    return out


def ranked_removals(t: Topology, m: HopMatrix) -> list[Edge]:
    """Non-bridge edges ordered by endpoint row-sum total, then lexicographically."""
    lam = m.row_sums
    skip = bridges(t)
    edges = [e for e in t.edges if e not in skip]
    return sorted(edges, key=lambda e: (lam[e[0]] + lam[e[1]], e))


def ranked_additions(t: Topology, m: HopMatrix) -> list[Edge]:
    """Missing edges ordered by descending row-sum total, then descending distance."""
    lam = m.row_sums
    missing = [
        p for p in itertools.combinations(range(t.node_count), 2) if p not in t.edge_set
    ]
    return sorted(missing, key=lambda p: (-(lam[p[0]] + lam[p[1]]), -m.dist[p], p))


def select_removal(t: Topology, m: HopMatrix) -> Edge:
    ranked = ranked_removals(t, m)
    if not ranked:
        raise NoRemovableEdge("every edge is a bridge")
    return ranked[0]


def select_addition(t: Topology, m: HopMatrix) -> Edge:
    ranked = ranked_additions(t, m)
    if not ranked:
        raise NoAddableEdge("topology is complete")
    return ranked[0]


def rewire_step(
    t: Topology, candidate_budget: int = 5000, keep_path_length: bool = True
) -> tuple[Topology, RewireStep]:
    """Apply the first strictly BCM-lowering (removal, addition) pair.

    Both the removal and the addition are ranked on the hop matrix of ``t``
    before the move. Pairs are tried removal-major: every addition is tried
    with the best removal before moving to the second removal. With
    ``keep_path_length`` a move that raises the total hop distance is skipped.
    """
    m = hop_matrix(t)
    before = bcm(m)
    total_before = m.dist.sum()
    removals = ranked_removals(t, m)
    if not removals:
        raise NoRemovableEdge("every edge is a bridge")
    additions = ranked_additions(t, m)
    if not additions:
        raise NoAddableEdge("topology is complete")

    best = None
    for tried, (rem, add) in enumerate(itertools.product(removals, additions)):
        if tried >= candidate_budget:
            break
        cand = t.with_edges(remove=[rem], add=[add])
        cm = hop_matrix(cand)
        if not cm.reachable:
            continue
        after = bcm_from_row_sums(cm.row_sums)
        step = RewireStep(rem, add, before, after)
        longer = keep_path_length and cm.dist.sum() > total_before
        # tolerance guards against accepting float noise as progress
        if after < before - 1e-12 and not longer:
            return cand, step
        if not longer and (best is None or after < best[1].bcm_after):
            best = (cand, step)
    raise LocalMinimum(f"no improving rewiring from BCM {before:.6f}", best)


def rewire_until(t: Topology, cfg: RewireConfig = RewireConfig()) -> tuple[Topology, list[RewireStep]]:
    """Repeat :func:`rewire_step` until the target BCM, a local minimum or the step cap."""
    max_steps = 10 * t.link_count if cfg.max_steps is None else cfg.max_steps
    trace: list[RewireStep] = []
    current = t
    current_bcm = bcm(hop_matrix(current))
    while len(trace) < max_steps and current_bcm > cfg.target_bcm:
        try:
            current, step = rewire_step(current, cfg.candidate_budget, cfg.keep_path_length)
        except LocalMinimum:
            break
        trace.append(step)
        current_bcm = step.bcm_after
    return current, trace


def replay(t: Topology, trace) -> Topology:
    for step in trace:
        t = t.with_edges(remove=[step.removed_edge], add=[step.added_edge])
    return t
