from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbwalk.graphs import Network, complete, cycle, path
from nbwalk.kernels import (
    Kernel, KernelError, Measure, NotStationaryError, StateSpace, UnreachableError,
    additive_symmetrization, check_stationary_reversible, induced_chain, kernel_network,
    kernel_power_apply, lazy, lump_network, mixture, network_kernel, renewal_hitting, time_reversal,
)
from nbwalk.stationary import pi_ke_measure
from nbwalk.walks import knbrw_kernel, line_graphs, nbrw_kernel, srw_kernel

from oracles import random_chain, true_stationary

H = Fraction(1, 2)


def rotation(n=3):
    space = StateSpace(range(n))
    return Kernel(space, [{(i + 1) % n: Fraction(1)} for i in range(n)])


def uniform(space):
    return Measure.counting(space)


def test_kernel_rejects_bad_rows():
    with pytest.raises(KernelError):
        Kernel(StateSpace([0, 1]), [{0: H}, {1: Fraction(1)}])
    with pytest.raises(KernelError):
        Kernel(StateSpace([0]), [{0: Fraction(3, 2), 1: Fraction(-1, 2)}])


def test_power_apply_identity_is_point_mass():
    I = Kernel.identity(StateSpace("abc"))
    assert kernel_power_apply(I, 7, "b") == {"b": 1}


def test_power_apply_srw_c3():
    P, _ = srw_kernel(cycle(3))
    assert kernel_power_apply(P, 2, 0) == {0: H, 1: Fraction(1, 4), 2: Fraction(1, 4)}


def test_power_apply_nbrw_c3_rotates():
    assert kernel_power_apply(nbrw_kernel(cycle(3)), 3, (0, 1)) == {(0, 1): 1}


@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(0, 6))
def test_power_apply_matches_matrix_power(seed, n, steps):
    M = random_chain(n, np.random.default_rng(seed))
    P = Kernel.from_dense(StateSpace(range(n)), M)
    got = kernel_power_apply(P, steps, 0)
    ref = np.linalg.matrix_power(M, steps)[0]
    for j in range(n):
        assert got.get(j, 0.0) == pytest.approx(ref[j], abs=1e-12)


def test_mixture_lazy_and_square():
    P, _ = srw_kernel(cycle(4))
    assert lazy(P) == mixture(P, [H, H]).kernel
    lazy_rows = lazy(P).rows
    assert lazy_rows[0] == {0: H, 1: Fraction(1, 4), 3: Fraction(1, 4)}
    mix = mixture(P, [0, 0, 1])
    assert mix.kernel == P.power(2) and mix.gcd == 2


def test_mixture_averaging_window_on_k4():
    B = nbrw_kernel(complete(4))
    D = mixture(B, [Fraction(1, 6)] * 6)
    ref = sum(np.linalg.matrix_power(B.to_dense().astype(float), i) for i in range(6)) / 6
    assert D.gcd == 1
    assert np.allclose(D.kernel.to_dense().astype(float), ref)


def test_mixture_rejects_bad_weights():
    P, _ = srw_kernel(cycle(4))
    with pytest.raises(KernelError):
        mixture(P, [H, H, H])


def test_time_reversal_examples():
    P, pi = srw_kernel(path(4))
    assert time_reversal(P, pi) == P
    R = rotation()
    assert time_reversal(R, uniform(R.space)) == Kernel(R.space, [{2: Fraction(1)}, {0: Fraction(1)}, {1: Fraction(1)}])
    B = nbrw_kernel(complete(4))
    star = time_reversal(B, uniform(B.space))
    for i in range(len(B)):
        for j in range(len(B)):
            assert star.entry(i, j) == B.entry(j, i)


def test_time_reversal_rejects_non_stationary():
    P, _ = srw_kernel(path(3))
    with pytest.raises(NotStationaryError):
        time_reversal(P, uniform(P.space))


def test_additive_symmetrization_examples():
    P, pi = srw_kernel(cycle(5))
    assert additive_symmetrization(P, pi) == P
    R = rotation()
    S = additive_symmetrization(R, uniform(R.space))
    assert S.rows[0] == {1: H, 2: H}
    g = complete(4)
    B = nbrw_kernel(g)
    S = additive_symmetrization(B, uniform(B.space))
    lg = line_graphs(g)
    for i, r in enumerate(S.rows):
        a = B.space[i]
        nbrs = {lg.oriented_labels[j] for j in lg.oriented_graph.adjacency[lg.oriented_labels.index(a)]}
        assert {B.space[j] for j in r} == nbrs


@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_symmetrization_float_matches_dense(seed, n):
    M = random_chain(n, np.random.default_rng(seed))
    pi = true_stationary(M)
    space = StateSpace(range(n))
    S = additive_symmetrization(Kernel.from_dense(space, M), Measure(space, tuple(pi)), tol=1e-9)
    ref = 0.5 * (M + (pi[None, :] * M.T) / pi[:, None])
    assert np.allclose(S.to_dense().astype(float), ref, atol=1e-12)


def test_induced_chain_gamblers_ruin():
    P, pi = srw_kernel(path(3))
    Q = induced_chain(P, [0, 2], pi)
    assert Q.rows == ({0: H, 1: H}, {0: H, 1: H})
    assert induced_chain(P, [0, 1, 2]) == P


def test_induced_chain_unreachable():
    space = StateSpace(range(3))
    P = Kernel(space, [{1: Fraction(1)}, {2: Fraction(1)}, {2: Fraction(1)}])
    with pytest.raises(UnreachableError) as exc:
        induced_chain(P, [0])
    assert exc.value.witness in (1, 2)


@given(st.integers(0, 2**32 - 1), st.integers(3, 8))
def test_induced_chain_matches_schur_complement(seed, n):
    rng = np.random.default_rng(seed)
    M = random_chain(n, rng)
    A = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
    B = [i for i in range(n) if i not in A]
    ref = M[np.ix_(A, A)]
    if B:
        ref = ref + M[np.ix_(A, B)] @ np.linalg.solve(np.eye(len(B)) - M[np.ix_(B, B)], M[np.ix_(B, A)])
    Q = induced_chain(Kernel.from_dense(StateSpace(range(n)), M), A)
    assert np.allclose(Q.to_dense().astype(float), ref, atol=1e-10)


def test_lump_singletons_and_c3_pairs():
    N = Network.unit(cycle(5))
    L = lump_network(N, [[v] for v in range(5)])
    assert L.graph.edges == N.graph.edges
    g = cycle(3)
    B = nbrw_kernel(g)
    lg = line_graphs(g)
    G = Network.unit(lg.oriented_graph)
    darts = lg.oriented_labels
    blocks = []
    for e in g.edges:
        blocks.append([darts.index(e), darts.index(e[::-1])])
    lumped = lump_network(G, blocks)
    assert sorted(lumped.graph.degrees) == [2, 2, 2]
    assert set(lumped.conductance.values()) == {Fraction(2)}
    assert len(B) == 6


def test_lump_oriented_k4_gives_octahedron():
    g = complete(4)
    lg = line_graphs(g)
    darts = lg.oriented_labels
    blocks = [[darts.index(e), darts.index(e[::-1])] for e in lg.edge_labels]
    lumped = lump_network(Network.unit(lg.oriented_graph), blocks)
    nonloop = {e for e in lumped.graph.edges if e[0] != e[1]}
    assert nonloop == set(lg.edge_graph.edges)
    assert set(lg.edge_graph.degrees) == {4}


def test_stationary_reversible_examples():
    P, pi = srw_kernel(complete(5))
    rep = check_stationary_reversible(P, pi)
    assert rep.stationary and rep.reversible
    R = rotation()
    rep = check_stationary_reversible(R, uniform(R.space))
    assert rep.stationary and not rep.reversible
    from nbwalk.graphs import bowtie

    K, _ = knbrw_kernel(bowtie(), 2, "edge")
    rep = check_stationary_reversible(K, pi_ke_measure(bowtie(), K.space))
    assert rep.stationary and not rep.reversible


def test_network_kernel_roundtrip():
    N = Network(path(3), {(0, 1): Fraction(1), (1, 2): Fraction(2)})
    P, pi = network_kernel(N)
    assert P.rows[1] == {0: Fraction(1, 3), 2: Fraction(2, 3)}
    N2 = kernel_network(P, pi)
    assert dict(N2.conductance) == dict(N.conductance)


def test_renewal_examples():
    assert all(q == 1 for q in renewal_hitting([0, 1], 10).q)
    rep = renewal_hitting([0, 0, 1], 9)
    assert rep.gcd == 2
    assert rep.q == tuple(Fraction(1) if l % 2 == 0 else Fraction(0) for l in range(10))
    rep = renewal_hitting([0, H, H], 4)
    assert rep.q[1] == H and rep.q[2] == Fraction(3, 4)


@given(st.lists(st.integers(0, 5), min_size=2, max_size=5).filter(lambda w: sum(w[1:]) > 0))
def test_renewal_matches_forward_recursion(counts):
    total = sum(counts)
    w = [Fraction(c, total) for c in counts]
    L = 8
    rep = renewal_hitting(w, L)
    # oracle: probability mass of ever landing on l, by dynamic programming over positions
    move = [x / (1 - w[0]) for x in w]
    land = [Fraction(0)] * (L + 1)
    land[0] = Fraction(1)
    for pos in range(L + 1):
        for j in range(1, len(move)):
            if pos + j <= L:
                land[pos + j] += land[pos] * move[j]
    assert list(rep.q) == land
