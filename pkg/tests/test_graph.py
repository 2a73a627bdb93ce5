import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hddconsensus.graph import (Graph, build_paper_topology, is_connected, neighbor_view,
                                write_edge_list)


def bfs_components(n, edges):
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, comps = set(), 0
    for s in range(n):
        if s in seen:
            continue
        comps += 1
        frontier = [s]
        seen.add(s)
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u] - seen:
                    seen.add(v)
                    nxt.append(v)
            frontier = nxt
    return comps


def test_adversaries_attach_to_every_cooperative_node():
    g = build_paper_topology(10, 3, 0.4, 7)
    for j in g.non_cooperative_set:
        assert neighbor_view(g, j).degree == 10
        assert set(g.neighbors(j)) == set(range(10))


def test_complete_core_degrees():
    g = build_paper_topology(10, 3, 1.0, 99)
    for i in g.cooperative_set:
        assert neighbor_view(g, i).degree == 12


def test_empty_graph():
    g = build_paper_topology(5, 0, 0.0, 3)
    assert g.edges == frozenset()


def test_rejects_no_cooperative_agents():
    with pytest.raises(ValueError):
        build_paper_topology(0, 3, 0.4, 1)


def test_adversary_edges_flag():
    off = build_paper_topology(4, 3, 1.0, 1)
    on = build_paper_topology(4, 3, 1.0, 1, adversary_edges=True)
    assert not any(off.has_edge(a, b) for a, b in itertools.combinations(range(4, 7), 2))
    assert all(on.has_edge(a, b) for a, b in itertools.combinations(range(4, 7), 2))


def test_is_connected_small_cases():
    assert is_connected(Graph.complete(4))
    assert not is_connected(Graph.from_edges(4, [(0, 1), (2, 3)]))


def test_is_connected_matches_traversal_oracle():
    hits = 0
    for seed in range(60):
        g = build_paper_topology(10, 3, 0.4, seed)
        assert is_connected(g) == (bfs_components(13, g.edges) == 1)
        # cooperative core alone
        core = Graph.from_edges(10, [e for e in g.edges if max(e) < 10])
        assert is_connected(core) == (bfs_components(10, core.edges) == 1)
        hits += not is_connected(core)
    assert hits > 0  # p=0.4 does disconnect the core sometimes


def test_neighbor_views():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    v = neighbor_view(path, 1)
    assert v.neighbors == (0, 2) and v.degree == 2
    assert set(v.inclusive) == {0, 1, 2} and v.inclusive[-1] == 1

    iso = Graph.from_edges(3, [(0, 1)])
    v = neighbor_view(iso, 2)
    assert v.neighbors == () and v.inclusive == (2,) and v.degree == 0

    k13 = Graph.complete(13)
    assert all(neighbor_view(k13, i).degree == 12 for i in range(13))

    with pytest.raises(IndexError):
        neighbor_view(path, 3)


@pytest.mark.parametrize("edges, n", [([(0, 0)], 2), ([(0, 5)], 3)])
def test_invalid_edges(edges, n):
    with pytest.raises(ValueError):
        Graph.from_edges(n, edges)


def test_partition_must_cover_agents():
    with pytest.raises(ValueError):
        Graph(3, frozenset(), frozenset({0}), frozenset({1}))
    with pytest.raises(ValueError):
        Graph(2, frozenset(), frozenset({0, 1}), frozenset({1}))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 4), st.floats(0, 1), st.integers(0, 2**32))
def test_generation_properties(n_coop, n_noncoop, p, seed):
    g = build_paper_topology(n_coop, n_noncoop, p, seed)
    again = build_paper_topology(n_coop, n_noncoop, p, seed)
    assert g == again
    dense = np.zeros((g.n_agents, g.n_agents), dtype=bool)
    for i, j in g.edges:
        dense[i, j] = dense[j, i] = True
    assert (dense == dense.T).all() and not dense.diagonal().any()
    for j in g.non_cooperative_set:
        assert len(g.neighbors(j)) == n_coop
    for i in range(g.n_agents):
        assert neighbor_view(g, i) == neighbor_view(g, i)
        assert list(g.neighbors(i)) == sorted(g.neighbors(i))
    indptr, indices = g.csr()
    assert indptr[-1] == 2 * len(g.edges)


def test_edge_list_export(tmp_path):
    g = Graph.from_edges(4, [(2, 3), (1, 0), (0, 2)])
    path = write_edge_list(g, tmp_path / "g.txt")
    assert path.read_text() == "0 1\n0 2\n2 3\n"
