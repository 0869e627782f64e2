import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from nbwalk.graphs import bowtie, complete, cycle, path, random_even_graph, random_min_degree_two
from nbwalk.kernels import KernelError
from nbwalk.walks import (
    ResourceCapError, enumerate_path_space, knbrw_kernel, line_graphs, nbrw_kernel, pbrw_kernel,
    reversal_access, stuck_check, transition_graph_and_quotient,
)

from oracles import allowed, distinct_edge_states

H = Fraction(1, 2)


def test_nbrw_entries():
    B = nbrw_kernel(cycle(3))
    assert B((0, 1), (1, 2)) == 1 and B((0, 1), (1, 0)) == 0
    assert nbrw_kernel(path(3))((1, 2), (2, 1)) == 1
    B = nbrw_kernel(complete(4))
    assert B.row((0, 1)) == {(1, 2): H, (1, 3): H}


def test_pbrw_entries():
    Bp = pbrw_kernel(cycle(3), H)
    assert Bp((0, 1), (1, 0)) == H and Bp((0, 1), (1, 2)) == H
    assert pbrw_kernel(path(3), Fraction(1, 5))((1, 2), (2, 1)) == 1
    third = Fraction(1, 3)
    assert pbrw_kernel(complete(4), third).row((0, 1)) == {(1, 0): third, (1, 2): third, (1, 3): third}
    for bad in (0, 1, Fraction(3, 2)):
        with pytest.raises(KernelError):
            pbrw_kernel(cycle(3), bad)


def test_path_space_sizes_k4():
    rep = enumerate_path_space(complete(4), 2, "edge")
    assert len(rep.all) == 36
    assert len(rep.edge_distinct) == len(rep.vertex_distinct) == 24


def test_path_space_c3_closed():
    rep = enumerate_path_space(cycle(3), 2, "edge")
    assert len(rep.edge_distinct) == 6 and rep.reachable == rep.edge_distinct


def test_path_space_path_vertex_mode_grows():
    rep = enumerate_path_space(path(3), 2, "vertex")
    assert rep.vertex_distinct == [(0, 1, 2), (2, 1, 0)]
    assert set(rep.reachable) > set(rep.vertex_distinct)


def test_path_space_cap():
    with pytest.raises(ResourceCapError):
        enumerate_path_space(complete(6), 4, "edge", cap=100)


def test_knbrw_examples():
    K, _ = knbrw_kernel(cycle(3), 2, "edge")
    assert K.row((0, 1, 2)) == {(1, 2, 0): 1}
    K, rep = knbrw_kernel(bowtie(), 2, "edge")
    into_centre = [s for s in rep.edge_distinct if s[2] == 2]
    assert into_centre
    for s in into_centre:
        assert sorted(K.row(s).values()) == [Fraction(1, 3)] * 3
    K, _ = knbrw_kernel(path(3), 1, "edge")
    assert K.row((1, 2)) == {(2, 1): 1}


def _loop_free(seed, n):
    return random_min_degree_two(n, np.random.default_rng(seed))


@given(st.integers(0, 2**32 - 1), st.integers(3, 10), st.sampled_from(["edge", "vertex"]))
def test_nbrw_equals_window_walk_at_k1(seed, n, mode):
    g = _loop_free(seed, n)
    B = nbrw_kernel(g)
    K, _ = knbrw_kernel(g, 1, mode)
    assert set(K.space) == set(B.space)
    for a in B.space:
        assert K.row(a) == B.row(a)


@given(st.integers(0, 2**32 - 1), st.integers(3, 9), st.integers(1, 3), st.sampled_from(["edge", "vertex"]))
def test_row_supports(seed, n, k, mode):
    g = _loop_free(seed, n)
    K, _ = knbrw_kernel(g, k, mode)
    for s in K.space:
        row = K.row(s)
        last = s[-1]
        assert len(row) <= g.degree(last)
        nxt = {t[-1] for t in row}
        if mode == "edge":
            fresh = {w for w in g.adjacency[last] if (min(last, w), max(last, w))
                     not in {(min(a, b), max(a, b)) for a, b in zip(s, s[1:])}}
        else:
            fresh = {w for w in g.adjacency[last] if w not in s}
        assert nxt == (fresh or set(g.adjacency[last]))


@given(st.integers(0, 2**32 - 1), st.integers(3, 10), st.integers(1, 3))
def test_edge_walk_matches_oracle_on_even_graphs(seed, n, k):
    g = random_even_graph(n, np.random.default_rng(seed))
    assume(stuck_check(g, k, "edge").never_stuck)
    adj = [list(a) for a in g.adjacency]
    K, rep = knbrw_kernel(g, k, "edge")
    assert set(rep.edge_distinct) == set(distinct_edge_states(adj, k))
    for s in rep.edge_distinct:
        nxt = allowed(adj, s)
        assert K.row(s) == {s[1:] + (w,): Fraction(1, len(nxt)) for w in nxt}


def test_stuck_examples():
    assert stuck_check(bowtie(), 2, "edge").never_stuck
    rep = stuck_check(path(3), 2, "vertex")
    assert not rep.never_stuck and (0, 1, 2) in rep.stuck_states
    rep = stuck_check(complete(4), 3, "vertex")
    assert not rep.never_stuck and not rep.degree_criterion
    assert (0, 1, 2, 3) in rep.stuck_states


@given(st.integers(0, 2**32 - 1), st.integers(3, 9), st.integers(1, 3), st.sampled_from(["edge", "vertex"]))
def test_degree_criterion_is_sufficient(seed, n, k, mode):
    rep = stuck_check(_loop_free(seed, n), k, mode)
    if rep.degree_criterion:
        assert rep.never_stuck


@given(st.integers(0, 2**32 - 1), st.integers(4, 11), st.integers(1, 3))
def test_parity_criterion_on_even_graphs(seed, n, k):
    g = random_even_graph(n, np.random.default_rng(seed))
    assume(not (len(g.edges) == g.n <= k))
    rep = stuck_check(g, k, "edge")
    assert rep.parity_criterion and rep.sufficiency_ok


def test_parity_criterion_breaks_when_window_spans_a_cycle():
    # with k = 3 the window covers all of C3: the walk re-enters its start vertex with both edges used
    rep = stuck_check(cycle(3), 3, "edge")
    assert rep.parity_criterion and not rep.never_stuck
    assert (0, 1, 2, 0) in rep.stuck_states and not rep.sufficiency_ok
    assert stuck_check(cycle(3), 2, "edge").never_stuck


def test_reversal_access_examples():
    acc = reversal_access(nbrw_kernel(complete(4)))
    assert set(acc.per_state.values()) == {4}
    assert reversal_access(nbrw_kernel(cycle(3))).worst == math.inf
    assert reversal_access(nbrw_kernel(path(3))).per_state[(1, 2)] == 1


def test_line_graph_examples():
    lg = line_graphs(cycle(6))
    assert nx.is_isomorphic(lg.edge_graph.to_networkx(), nx.cycle_graph(6))
    lg = line_graphs(cycle(3))
    comps = list(nx.connected_components(lg.oriented_graph.to_networkx()))
    assert sorted(len(c) for c in comps) == [3, 3]
    assert all(nx.is_isomorphic(lg.oriented_graph.to_networkx().subgraph(c), nx.cycle_graph(3)) for c in comps)
    lg = line_graphs(complete(4))
    assert nx.is_isomorphic(lg.edge_graph.to_networkx(), nx.octahedral_graph())


@given(st.integers(0, 2**32 - 1), st.integers(3, 12))
def test_line_graph_matches_networkx(seed, n):
    g = _loop_free(seed, n)
    lg = line_graphs(g)
    assert nx.is_isomorphic(lg.edge_graph.to_networkx(), nx.line_graph(g.to_networkx()))


@given(st.integers(0, 2**32 - 1), st.integers(3, 10))
def test_transition_graph_at_k1_is_oriented_line_graph(seed, n):
    g = _loop_free(seed, n)
    tg = transition_graph_and_quotient(nbrw_kernel(g))
    lg = line_graphs(g)
    assert nx.is_isomorphic(tg.support.to_networkx(), lg.oriented_graph.to_networkx())
    assert nx.is_isomorphic(tg.quotient.to_networkx(), lg.edge_graph.to_networkx())
    assert all(len(c) == 2 for c in tg.classes)


def test_transition_graph_c3_k2():
    K, _ = knbrw_kernel(cycle(3), 2, "edge")
    tg = transition_graph_and_quotient(K)
    comps = list(nx.connected_components(tg.support.to_networkx()))
    assert sorted(len(c) for c in comps) == [3, 3]
    assert nx.is_isomorphic(tg.quotient.to_networkx(), nx.cycle_graph(3))
