import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from v2g_audit.errors import InconsistentComponentCount
from v2g_audit.graph import PropertyGraph, make_graph
from v2g_audit.spectral import (
    component_count_spectral,
    component_count_unionfind,
    components,
    cycle_number,
    eigenvalues,
    fundamental_cycles,
    induced_subgraph,
    laplacian,
    matrix_rank,
)

from oracles import bfs_component_count, cycle_space_dimension, exact_rank

K3 = [(0, 1), (1, 2), (0, 2)]
K3_P2 = K3 + [(3, 4)]


@st.composite
def graphs(draw, max_nodes=12):
    n = draw(st.integers(0, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return n, edges


def test_laplacian_k3():
    lap = laplacian(make_graph(K3)).entries
    assert np.array_equal(np.diag(lap), [2, 2, 2])
    assert np.all(lap[~np.eye(3, dtype=bool)] == -1)


def test_laplacian_single_node():
    assert laplacian(make_graph([], n=1)).entries.tolist() == [[0.0]]


def test_laplacian_path():
    lap = laplacian(make_graph([(0, 1), (1, 2)])).entries
    assert lap.tolist() == [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]


def test_spectral_counts_known_spectra():
    assert np.allclose(eigenvalues(laplacian(make_graph(K3))), [0, 3, 3])
    assert component_count_spectral(laplacian(make_graph(K3))) == 1
    assert component_count_spectral(laplacian(make_graph([], n=2))) == 2
    assert component_count_spectral(laplacian(make_graph(K3_P2))) == 2


def test_unionfind_counts():
    assert component_count_unionfind(PropertyGraph()).count == 0
    part = component_count_unionfind(make_graph(K3_P2))
    assert part.count == 2
    assert len({part.assignment[i] for i in (0, 1, 2)}) == 1
    assert part.assignment[3] == part.assignment[4] != part.assignment[0]


def test_cross_check_raises_on_disagreement():
    # an absurd threshold makes every eigenvalue count as zero
    with pytest.raises(InconsistentComponentCount):
        components(make_graph(K3), eps=10.0)


@given(graphs())
def test_laplacian_structure(ge):
    n, edges = ge
    lap = laplacian(make_graph(edges, n=n)).entries
    assert np.array_equal(lap, lap.T)
    assert np.allclose(lap.sum(axis=1), 0)
    off = lap[~np.eye(n, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, -1.0}
    if n:
        assert eigenvalues(laplacian(make_graph(edges, n=n))).min() >= -1e-9


@given(graphs(), st.integers(0, 2**32 - 1))
def test_quadratic_form_is_edge_energy(ge, seed):
    n, edges = ge
    x = np.random.default_rng(seed).normal(size=n)
    lap = laplacian(make_graph(edges, n=n))
    energy = sum((x[a] - x[b]) ** 2 for a, b in edges)
    assert lap.quadratic_form(x) == pytest.approx(energy, abs=1e-9)
    assert lap.quadratic_form(x) >= -1e-12


@given(graphs(max_nodes=30))
def test_spectral_equals_unionfind_equals_bfs(ge):
    n, edges = ge
    g = make_graph(edges, n=n)
    c = component_count_unionfind(g).count
    assert c == bfs_component_count(n, edges)
    assert component_count_spectral(laplacian(g)) == c


@given(graphs(max_nodes=9))
def test_rank_identity_exact(ge):
    n, edges = ge
    g = make_graph(edges, n=n)
    lap = laplacian(g).entries
    c = component_count_unionfind(g).count
    if n:
        assert matrix_rank(lap) == exact_rank(lap.astype(int).tolist()) == n - c


def test_cycle_number_examples():
    assert cycle_number(make_graph(K3)) == 1
    assert cycle_number(make_graph([(0, 1), (1, 2)])) == 0
    two = K3 + [(3, 4), (4, 5), (3, 5)]
    assert cycle_number(make_graph(two)) == 2 == cycle_space_dimension(6, two)


@given(graphs(max_nodes=7))
def test_cycle_number_brute_force(ge):
    n, edges = ge
    if len(edges) > 8:
        edges = edges[:8]
    assert cycle_number(make_graph(edges, n=n)) == cycle_space_dimension(n, edges)


@given(graphs(max_nodes=10), st.integers(0, 10**6))
def test_cycle_number_edge_laws(ge, seed):
    n, edges = ge
    if n < 2:
        return
    g = make_graph(edges, n=n)
    beta = cycle_number(g)
    assert beta >= 0
    present = set(edges)
    missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present]
    if not missing:
        return
    a, b = random.Random(seed).choice(missing)
    part = component_count_unionfind(g)
    same = part.assignment[a] == part.assignment[b]
    assert cycle_number(make_graph(edges + [(a, b)], n=n)) == beta + (1 if same else 0)


def test_fundamental_cycles_are_cycles():
    g = make_graph(K3 + [(2, 3), (3, 4), (4, 2)])
    cycles = fundamental_cycles(g)
    assert len(cycles) == cycle_number(g) == 2
    for cyc in cycles:
        closed = cyc + [cyc[0]]
        assert all(b in g.neighbors(a) for a, b in zip(closed, closed[1:]))


def test_induced_subgraph():
    g = make_graph(K3)
    assert induced_subgraph(g, lambda i: True) == g
    assert induced_subgraph(g, lambda i: False) == PropertyGraph()
    sub = induced_subgraph(g, lambda i: i < 2)
    assert [n.id for n in sub.nodes] == [0, 1] and [(e.a, e.b) for e in sub.edges] == [(0, 1)]


def test_fifty_node_random_graphs():
    rng = random.Random(11)
    for _ in range(50):
        n = 50
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.04]
        g = make_graph(edges, n=n)
        assert component_count_spectral(laplacian(g)) == component_count_unionfind(g).count
