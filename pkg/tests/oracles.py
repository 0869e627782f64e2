"""Brute-force reference computations used by the tests.

Everything here works from the adjacency lists alone with plain Fractions and
numpy; nothing is routed through the package's Kernel machinery, so agreement
with the package is a genuine cross-check.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import numpy as np


def _e(u, v):
    return (u, v) if u < v else (v, u)


def window_ok(seq, k):
    """Every k consecutive steps of the vertex sequence cross distinct edges."""
    for i in range(len(seq) - k):
        es = [_e(seq[j], seq[j + 1]) for j in range(i, i + k)]
        if len(set(es)) < k:
            return False
    return True


def distinct_edge_states(adj, k):
    out = []

    def grow(p):
        if len(p) == k + 1:
            out.append(tuple(p))
            return
        used = {_e(p[j], p[j + 1]) for j in range(len(p) - 1)}
        for w in adj[p[-1]]:
            if _e(p[-1], w) not in used:
                grow(p + [w])

    for v in range(len(adj)):
        grow([v])
    return out


def allowed(adj, state):
    used = {_e(state[j], state[j + 1]) for j in range(len(state) - 1)}
    return [w for w in adj[state[-1]] if _e(state[-1], w) not in used]


def step_prob(adj, state, w):
    """Edge k-NBRW probability of moving from ``state`` to the vertex ``w`` (stuck-free graphs)."""
    nxt = allowed(adj, state)
    if not nxt:
        raise ValueError(f"stuck at {state}")
    return Fraction(1, len(nxt)) if w in nxt else Fraction(0)


def product_weight(adj, state):
    """prod over interior positions of 1/(deg - multiplicity in the trailing window)."""
    k = len(state) - 1
    w = Fraction(1)
    for i in range(1, k):
        m = sum(1 for j in range(max(0, i - k + 1), i + 1) if state[j] == state[i])
        w /= len(adj[state[i]]) - m
    return w


def stationarity_defects(adj, k):
    """States b with sum_a pi(a) P(a, b) != pi(b)."""
    states = distinct_edge_states(adj, k)
    mass = defaultdict(Fraction)
    for a in states:
        pa = product_weight(adj, a)
        nxt = allowed(adj, a)
        for w in nxt:
            mass[a[1:] + (w,)] += pa / len(nxt)
    return [b for b in states if mass[b] != product_weight(adj, b)]


def walk_sequences(adj, k, n):
    """Vertex sequences of length n + k + 1 whose windows of k steps cross distinct edges."""
    out = []

    def grow(p):
        if len(p) == n + k + 1:
            out.append(tuple(p))
            return
        for w in adj[p[-1]]:
            q = p + [w]
            if window_ok(q[-(k + 1):], k):
                grow(q)

    for v in range(len(adj)):
        grow([v])
    return out


def sequence_prob(adj, k, seq):
    pr = Fraction(1)
    for i in range(len(seq) - k - 1):
        pr *= step_prob(adj, seq[i:i + k + 1], seq[i + k + 1])
        if pr == 0:
            return pr
    return pr


def trajectory_symmetry_defects(adj, k, n):
    """Both lines: per-trajectory balance, and the summed n-step kernel balance."""
    line1 = []
    Pn = defaultdict(Fraction)
    for seq in walk_sequences(adj, k, n):
        fwd = product_weight(adj, seq[:k + 1]) * sequence_prob(adj, k, seq)
        rev = seq[::-1]
        bwd = product_weight(adj, seq[-(k + 1):]) * sequence_prob(adj, k, rev)
        if fwd != bwd:
            line1.append(seq)
        Pn[(seq[:k + 1], seq[-(k + 1):])] += sequence_prob(adj, k, seq)
    line2 = []
    for (a, b), v in Pn.items():
        lhs = product_weight(adj, a) * v
        rhs = product_weight(adj, b) * Pn.get((b[::-1], a[::-1]), Fraction(0))
        if lhs != rhs:
            line2.append((a, b))
    return line1, line2, dict(Pn)


def true_stationary(P: np.ndarray) -> np.ndarray:
    """Left Perron vector of a dense irreducible stochastic matrix, normalised to sum 1."""
    w, v = np.linalg.eig(P.T)
    i = int(np.argmin(abs(w - 1)))
    x = np.real(v[:, i])
    return x / x.sum()


# ---------------------------------------------------------------- potential theory


def random_chain(n, rng, density=0.5):
    """Dense random irreducible stochastic matrix (a Hamiltonian cycle guarantees irreducibility)."""
    M = rng.random((n, n)) * (rng.random((n, n)) < density)
    perm = rng.permutation(n)
    for i in range(n):
        M[perm[i], perm[(i + 1) % n]] += rng.random() + 0.1
    np.fill_diagonal(M, 0.0)
    return M / M.sum(axis=1, keepdims=True)


def escape_capacity(P, pi, A, Z):
    """sum_{a in A} pi(a) P_a(hit Z before returning to A), by a dense solve."""
    n = len(P)
    A, Z = list(A), list(Z)
    free = [i for i in range(n) if i not in A and i not in Z]
    # h(x) = P_x(hit Z before A) on free states
    h = np.zeros(n)
    h[Z] = 1.0
    if free:
        Q = P[np.ix_(free, free)]
        rhs = P[np.ix_(free, Z)].sum(axis=1)
        h[free] = np.linalg.solve(np.eye(len(free)) - Q, rhs)
    return float(sum(pi[a] * (P[a] @ h) for a in A))


def dirichlet_capacity(C, A, Z):
    """min sum_{x<y} C[x,y](f(x)-f(y))^2 over f = 1 on A, 0 on Z, for symmetric conductances C."""
    n = len(C)
    L = np.diag(C.sum(axis=1)) - C
    free = [i for i in range(n) if i not in A and i not in Z]
    f = np.zeros(n)
    f[list(A)] = 1.0
    if free:
        f[free] = np.linalg.solve(L[np.ix_(free, free)], -L[np.ix_(free, list(A))].sum(axis=1))
    return float(f @ L @ f)


def energy(C, f):
    """sum over unordered pairs (loops excluded) of C[x, y] (f(x) - f(y))^2."""
    f = np.asarray(f, dtype=float)
    D = f[:, None] - f[None, :]
    return float(0.5 * np.sum(C * D * D))


# ---------------------------------------------------------------- auxiliary chain


def green_series_W(K, classes, p, N):
    """Partial sums of p (1-p)^j K_L^j averaged over classes, with dense numpy."""
    n = len(K)
    KL = 0.5 * (np.eye(n) + K)
    G = np.zeros_like(KL)
    term = np.eye(n)
    for j in range(N + 1):
        G += p * (1 - p) ** j * term
        term = term @ KL
    m = len(classes)
    W = np.zeros((m, m))
    for a, A in enumerate(classes):
        for b, B in enumerate(classes):
            W[a, b] = G[np.ix_(A, B)].sum() / len(A)
    return W
