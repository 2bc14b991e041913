"""Graph construction, mutation, centrality, and decomposition tests."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggmsmc.graphs import (
    Graph,
    betweenness,
    degree_sequence,
    flip_edge,
    new_graph,
    prime_components,
    read_edge_list,
    write_edge_list,
)


def complete_graph(p):
    return new_graph(p, [(i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)])


def random_graph(rng, p, density=None):
    r = p * (p - 1) // 2
    density = rng.random() if density is None else density
    upper = (rng.random(r) < density).astype(np.uint8)
    adj = np.zeros((p, p), dtype=np.uint8)
    adj[np.triu_indices(p, 1)] = upper
    return Graph(adj + adj.T)


class TestNewGraph:
    def test_empty(self):
        g = new_graph(3, [])
        assert g.edge_count == 0
        assert g.p == 3

    def test_complete_triangle(self):
        g = new_graph(3, [(1, 2), (2, 3), (1, 3)])
        assert g.edge_count == 3

    def test_four_cycle_degrees(self):
        g = new_graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        assert degree_sequence(g).tolist() == [2, 2, 2, 2]

    def test_duplicates_idempotent(self):
        g = new_graph(3, [(1, 2), (1, 2), (2, 1)])
        assert g.edge_count == 1

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            new_graph(3, [(2, 2)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            new_graph(3, [(1, 4)])

    def test_adjacency_read_only(self):
        g = new_graph(2, [(1, 2)])
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = 0


class TestFlipEdge:
    def test_empty_to_single_edge(self):
        g = flip_edge(new_graph(2), 1, 2)
        assert g.edge_count == 1

    def test_involution_exhaustive_small(self):
        rng = np.random.default_rng(0)
        for p in range(2, 7):
            g = random_graph(rng, p)
            for i in range(1, p + 1):
                for j in range(i + 1, p + 1):
                    assert flip_edge(flip_edge(g, i, j), i, j) == g

    def test_chordal_four_cycle(self):
        g = new_graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        assert flip_edge(g, 1, 3).edge_count == 5

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            flip_edge(new_graph(3), 2, 2)


class TestDegreeSequence:
    def test_complete(self):
        assert degree_sequence(complete_graph(4)).tolist() == [3, 3, 3, 3]

    def test_path(self):
        assert degree_sequence(new_graph(3, [(1, 2), (2, 3)])).tolist() == [1, 2, 1]

    @given(st.integers(2, 8), st.integers(0, 10**9))
    @settings(max_examples=40, deadline=None)
    def test_sum_is_twice_edge_count(self, p, seed):
        g = random_graph(np.random.default_rng(seed), p)
        assert degree_sequence(g).sum() == 2 * g.edge_count


class TestBetweenness:
    def test_path_middle_node(self):
        assert betweenness(new_graph(3, [(1, 2), (2, 3)])).tolist() == [0.0, 1.0, 0.0]

    def test_star_center(self):
        g = new_graph(5, [(1, 2), (1, 3), (1, 4), (1, 5)])
        b = betweenness(g)
        assert b[0] == pytest.approx(1.0)
        assert np.all(b[1:] == 0.0)

    def test_complete_all_zero(self):
        assert np.all(betweenness(complete_graph(5)) == 0.0)

    def test_small_graphs_return_zero(self):
        assert betweenness(new_graph(2, [(1, 2)])).tolist() == [0.0, 0.0]

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            b = betweenness(random_graph(rng, int(rng.integers(3, 9))))
            assert np.all(b >= 0.0) and np.all(b <= 1.0)


def brute_force_has_clique_separator(adj):
    """Exhaustive check whether any complete vertex set disconnects the graph."""
    p = adj.shape[0]
    verts = list(range(p))
    for size in range(0, p - 1):
        for sep in itertools.combinations(verts, size):
            sep = set(sep)
            rest = [v for v in verts if v not in sep]
            if not rest:
                continue
            if not all(adj[a, b] for a in sep for b in sep if a < b):
                continue
            seen: set = set()
            pieces = 0
            for v in rest:
                if v in seen:
                    continue
                pieces += 1
                stack = [v]
                seen.add(v)
                while stack:
                    u = stack.pop()
                    for w in rest:
                        if w not in seen and adj[u, w]:
                            seen.add(w)
                            stack.append(w)
            if pieces > 1:
                return True
    return False


class TestPrimeComponents:
    def test_path(self):
        dec = prime_components(new_graph(3, [(1, 2), (2, 3)]))
        assert sorted(dec.components) == [(1, 2), (2, 3)]
        assert dec.separators == ((2,),)

    def test_four_cycle_is_prime(self):
        g = new_graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        adj = g.adjacency.astype(np.int64)
        # oracle: the 4-cycle has no complete separator at all
        assert not brute_force_has_clique_separator(adj)
        dec = prime_components(g)
        assert dec.components == ((1, 2, 3, 4),)
        assert dec.separators == ()
        assert dec.complete == (False,)

    def test_complete_graph(self):
        dec = prime_components(complete_graph(5))
        assert dec.components == ((1, 2, 3, 4, 5),)
        assert dec.complete == (True,)

    def test_isolated_vertices_are_singletons(self):
        dec = prime_components(new_graph(4, [(1, 2), (2, 3)]))
        assert (4,) in dec.components
        assert all(dec.complete[i] for i, c in enumerate(dec.components) if len(c) == 1)

    @given(st.integers(2, 8), st.integers(0, 10**9))
    @settings(max_examples=60, deadline=None)
    def test_decomposition_invariants(self, p, seed):
        g = random_graph(np.random.default_rng(seed), p)
        adj = g.adjacency
        dec = prime_components(g)
        # every vertex covered; edge union reproduces the graph exactly
        covered = set()
        edges = set()
        for comp in dec.components:
            covered |= set(comp)
            for a in comp:
                for b in comp:
                    if a < b and adj[a - 1, b - 1]:
                        edges.add((a, b))
        assert covered == set(range(1, p + 1))
        assert edges == set(g.edges())
        # perfect sequence with complete separators
        prev: set = set()
        for idx, comp in enumerate(dec.components):
            if idx > 0:
                sep = set(dec.separators[idx - 1])
                assert sep == set(comp) & prev
                assert all(adj[a - 1, b - 1] for a in sep for b in sep if a < b)
            prev |= set(comp)
        # every component is prime (no clique separator), per brute force
        for comp in dec.components:
            idx_arr = np.asarray([v - 1 for v in comp])
            assert not brute_force_has_clique_separator(adj[np.ix_(idx_arr, idx_arr)])

    def test_chordal_graphs_have_complete_components(self):
        # random interval graphs are chordal
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = int(rng.integers(2, 10))
            lo = rng.random(p)
            hi = lo + rng.random(p) * 0.6
            adj = np.zeros((p, p), dtype=np.uint8)
            for i in range(p):
                for j in range(i + 1, p):
                    if max(lo[i], lo[j]) <= min(hi[i], hi[j]):
                        adj[i, j] = adj[j, i] = 1
            dec = prime_components(Graph(adj))
            assert all(dec.complete)


class TestEdgeListFormat:
    def test_round_trip(self, tmp_path):
        g = new_graph(5, [(1, 4), (2, 3), (4, 5)])
        path = tmp_path / "graph.txt"
        write_edge_list(g, path)
        assert read_edge_list(path, 5) == g
        assert path.read_text() == "1 4\n2 3\n4 5\n"
