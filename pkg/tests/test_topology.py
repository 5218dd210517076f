import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcmnet.errors import DegenerateTopology, DisconnectedTopology, DuplicateEdge, InvalidEdge
from bcmnet.topology import (
    HopMatrix,
    adjacency_from_hop_matrix,
    bcm,
    build_topology,
    clustering_coefficient,
    hop_matrix,
    topology_stats,
)

from conftest import FIG1_EDGES, FIG1_MATRIX, PRISM_EDGES, PRISM_MATRIX
from oracles import floyd_warshall, random_connected


def test_build_normalizes_edges():
    t = build_topology(6, [(1, 0), (5, 3), (2, 0)])
    assert t.edges == ((0, 1), (0, 2), (3, 5))
    assert t.node_count == 6 and t.link_count == 3


def test_fig1_dimensions(fig1):
    assert (fig1.node_count, fig1.link_count) == (6, 9)


def test_two_node_graph():
    t = build_topology(2, [(0, 1)])
    assert t.link_count == 1
    assert hop_matrix(t).dist.tolist() == [[0, 1], [1, 0]]


@pytest.mark.parametrize(
    "n, edges, exc",
    [
        (4, [(3, 3)], InvalidEdge),
        (4, [(0, 4)], InvalidEdge),
        (4, [(-1, 2)], InvalidEdge),
        (4, [(0, 1), (1, 0)], DuplicateEdge),
        (0, [], InvalidEdge),
    ],
)
def test_build_rejects(n, edges, exc):
    with pytest.raises(exc):
        build_topology(n, edges)


def test_adjacency_matrix(fig1):
    a = fig1.adjacency
    assert (a == a.T).all() and not a.diagonal().any()
    assert a.sum() == 2 * fig1.link_count


def test_fig1_hop_matrix(fig1):
    m = hop_matrix(fig1)
    assert m.dist.tolist() == FIG1_MATRIX
    assert m.row_sums.tolist() == [6, 7, 8, 5, 8, 8]
    assert m.reachable


def test_prism_hop_matrix(prism):
    m = hop_matrix(prism)
    assert m.dist.tolist() == PRISM_MATRIX
    assert m.row_sums.tolist() == [7] * 6


def test_disconnected_is_flagged_not_raised():
    m = hop_matrix(build_topology(4, [(0, 1), (2, 3)]))
    assert not m.reachable
    assert math.isinf(m.dist[0, 2])
    with pytest.raises(DisconnectedTopology):
        bcm(m)


def test_bcm_values(fig1, prism):
    assert bcm(hop_matrix(fig1)) == pytest.approx(1.2649110640673518, abs=1e-12)
    assert round(bcm(hop_matrix(fig1)), 3) == 1.265
    assert bcm(hop_matrix(prism)) == 0.0
    path3 = build_topology(3, [(0, 1), (1, 2)])
    assert bcm(hop_matrix(path3)) == pytest.approx(math.sqrt((1 / 9 + 4 / 9 + 1 / 9) / 2))
    assert bcm(hop_matrix(path3)) == pytest.approx(0.57735, abs=1e-5)


def test_bcm_single_node_is_degenerate():
    with pytest.raises(DegenerateTopology):
        bcm(hop_matrix(build_topology(1, [])))


def test_fig1_stats(fig1):
    s = topology_stats(fig1)
    assert s.avg_path_length == 1.4
    assert s.total_distance == 42
    assert s.diameter == 2
    assert s.links_per_node == 1.5
    assert s.avg_degree_undirected == 3.0
    assert s.arithmetic_mean_row_sum == 7.0
    # node-averaged: (3/6 + 2/3 + 1 + 4/10 + 1 + 1) / 6
    assert s.clustering_coefficient == pytest.approx(0.7611, abs=1e-4)
    assert s.clustering_coefficient == pytest.approx((0.5 + 2 / 3 + 1 + 0.4 + 1 + 1) / 6)


def test_star_stats():
    star = build_topology(4, [(0, 1), (0, 2), (0, 3)])
    s = topology_stats(star)
    assert s.avg_path_length == 1.5
    assert s.clustering_coefficient == 0
    assert s.diameter == 2


def test_clustering_complete_graph_is_one():
    k5 = build_topology(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    assert clustering_coefficient(k5) == 1.0


def test_adjacency_from_hop_matrix(fig1, prism):
    assert adjacency_from_hop_matrix(HopMatrix(np.array(FIG1_MATRIX, float))) == fig1
    assert adjacency_from_hop_matrix(HopMatrix(np.array(PRISM_MATRIX, float))) == prism
    assert list(prism.edges) == sorted(PRISM_EDGES)
    assert list(fig1.edges) == sorted(FIG1_EDGES)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_vertex_transitive_graphs_have_zero_bcm(n):
    cycle = build_topology(n, [(i, (i + 1) % n) for i in range(n)])
    complete = build_topology(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    assert bcm(hop_matrix(cycle)) == 0
    assert bcm(hop_matrix(complete)) == 0


graphs = st.builds(
    lambda seed, n, p: random_connected(np.random.default_rng(seed), n, p),
    st.integers(0, 2**32 - 1),
    st.integers(2, 10),
    st.floats(0.0, 0.8),
)


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_bfs_matches_floyd_warshall(t):
    m = hop_matrix(t)
    assert np.array_equal(m.dist, floyd_warshall(t))
    assert adjacency_from_hop_matrix(m) == t
    assert hop_matrix(adjacency_from_hop_matrix(m)) == m


@settings(max_examples=200, deadline=None)
@given(graphs, st.randoms())
def test_bcm_permutation_invariant(t, rnd):
    perm = list(range(t.node_count))
    rnd.shuffle(perm)
    assert bcm(hop_matrix(t.relabel(perm))) == pytest.approx(bcm(hop_matrix(t)), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_average_path_length_is_mean_off_diagonal(t):
    m = hop_matrix(t)
    s = topology_stats(t, m)
    off = m.dist[~np.eye(t.node_count, dtype=bool)]
    assert s.avg_path_length == pytest.approx(off.mean())
    assert s.diameter == off.max()
