import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from averlearn.errors import NotAnScc, NotSubstochastic
from averlearn.graph_analysis import (
    SINGLE_VERTEX_NO_LOOP,
    DiGraph,
    anchors,
    build_digraph,
    index_of_contraction,
    is_condensely_anchored,
    is_condensely_aperiodic,
    scc_period,
    strongly_connected_components,
)
from averlearn.matrix_core import induced_norm, matrix_power_limit

from conftest import CHAIN_A, CHAIN_E_SINK, CHAIN_E_TAIL, DELAYED_B, as_float, as_float_vec, random_substochastic

arc_sets = st.integers(1, 7).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(1, n), st.integers(1, n)), max_size=n * n),
    )
)


def _nx(G: DiGraph) -> nx.DiGraph:
    H = nx.DiGraph()
    H.add_nodes_from(range(1, G.n + 1))
    H.add_edges_from(G.arcs)
    return H


def _brute_period(G: DiGraph, comp) -> object:
    """gcd of closed-walk lengths through one vertex, from boolean matrix powers."""
    n = G.n
    M = np.zeros((n, n), dtype=bool)
    for i, j in G.arcs:
        if i in comp and j in comp:
            M[i - 1, j - 1] = True
    v = min(comp) - 1
    P = np.eye(n, dtype=bool)
    g = 0
    for k in range(1, 2 * n * n + 1):
        P = (P.astype(int) @ M.astype(int)) > 0
        if P[v, v]:
            g = math.gcd(g, k)
    return g if g else SINGLE_VERTEX_NO_LOOP


def test_digraph_rejects_out_of_range():
    with pytest.raises(ValueError):
        DiGraph.from_arcs(2, [(1, 3)])


def test_build_digraph_uses_exact_nonzeros():
    G = build_digraph([[0.5, 1e-300], [0, 1]])
    assert G.arcs == frozenset({(1, 1), (1, 2), (2, 2)})
    assert build_digraph([[0.5, 1e-300], [0, 1]], zero_tol=1e-12).arcs == frozenset({(1, 1), (2, 2)})


@settings(max_examples=150, deadline=None)
@given(arc_sets)
def test_scc_matches_networkx(data):
    n, arcs = data
    G = DiGraph.from_arcs(n, arcs)
    dec = strongly_connected_components(G)
    expected = {frozenset(c) for c in nx.strongly_connected_components(_nx(G))}
    assert set(dec.components) == expected
    # numbered by smallest vertex
    assert [min(c) for c in dec.components] == sorted(min(c) for c in dec.components)
    cond = nx.condensation(_nx(G))
    assert nx.is_directed_acyclic_graph(_nx(dec.condensation))
    assert len(dec.sinks) == sum(1 for v in cond if cond.out_degree(v) == 0)
    for c, comp in enumerate(dec.components, 1):
        assert dec.periods[c] == _brute_period(G, comp)


def test_period_examples():
    cycle = DiGraph.from_arcs(3, [(1, 2), (2, 3), (3, 1)])
    assert scc_period(cycle, {1, 2, 3}) == 3
    chord = DiGraph.from_arcs(3, [(1, 2), (2, 3), (3, 1), (1, 3)])
    assert scc_period(chord, {1, 2, 3}) == 1
    single = DiGraph.from_arcs(2, [(1, 2)])
    assert scc_period(single, {1}) is SINGLE_VERTEX_NO_LOOP
    with pytest.raises(NotAnScc):
        scc_period(single, {1, 2})


def test_chain_structure():
    A = as_float(CHAIN_A)
    rep1 = is_condensely_anchored(A, as_float_vec(CHAIN_E_SINK))
    assert rep1.anchors == {1} and rep1.condensely_anchored
    assert rep1.sinks == [frozenset({1})]
    assert all(w is not None and w[-1] == 1 for w in rep1.witness_walks.values())
    rep2 = is_condensely_anchored(A, as_float_vec(CHAIN_E_TAIL))
    assert rep2.anchors == {5} and not rep2.condensely_anchored
    assert rep2.witness_walks[1] is None
    assert is_condensely_aperiodic(A)


def test_anchor_classes():
    A = np.array([[0.5, 0.5], [0.5, 0.5]])
    rep = anchors(A, [0.0, 1.0])
    assert rep.defective == {1} and rep.overlearners == {2} and not rep.anchors
    assert anchors(A, [0.99, 0.25]).anchors == {1, 2}


def test_condensely_aperiodic_stochastic_has_limit(rng):
    # a stochastic matrix has lim A^t exactly when it is condensely aperiodic
    for _ in range(100):
        n = int(rng.integers(2, 6))
        A = (rng.random((n, n)) < 0.35).astype(float)
        for i in range(n):
            if A[i].sum() == 0:
                A[i, (i + 1) % n] = 1
        A /= A.sum(axis=1, keepdims=True)
        res = matrix_power_limit(A)
        assert (res.verdict.value == "ConvergedTo") == is_condensely_aperiodic(A)


def test_index_of_contraction_delayed():
    B = as_float(DELAYED_B)
    assert index_of_contraction(B) == 3
    Bk = np.eye(4)
    for k in range(1, 4):
        Bk = Bk @ B
        assert induced_norm(Bk, np.inf) == pytest.approx(1, abs=1e-15)
    assert induced_norm(Bk @ B, np.inf) < 1


def test_index_of_contraction_edge_cases():
    assert index_of_contraction(np.eye(3)) == math.inf
    assert index_of_contraction(0.5 * np.eye(3)) == 0
    with pytest.raises(NotSubstochastic):
        index_of_contraction([[1.2, 0], [0, 1]])


def test_index_bounds_norm_contraction(rng):
    # finite index k means ||B^(k+1)||_inf < 1
    for _ in range(200):
        n = int(rng.integers(1, 7))
        B = random_substochastic(rng, n)
        k = index_of_contraction(B)
        if k == math.inf:
            continue
        assert induced_norm(np.linalg.matrix_power(B, k + 1), np.inf) < 1
        if k > 0:
            assert induced_norm(np.linalg.matrix_power(B, k), np.inf) == pytest.approx(1, abs=1e-12)


def test_dot_output():
    G = DiGraph.from_arcs(2, [(1, 2)])
    dot = G.to_dot("g", {1: "a", 2: "b"})
    assert dot.startswith("digraph g {") and "1 -> 2;" in dot
