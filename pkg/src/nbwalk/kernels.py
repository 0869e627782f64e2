"""Sparse row-stochastic kernels over labelled state spaces.

Two backends share one representation: each row is a ``dict`` from column
index to probability. The exact backend stores :class:`fractions.Fraction`
values, the float backend plain ``float``. Exact linear solves go through
``python-flint`` rational matrices; float solves through ``scipy.sparse``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphs import GraphError, Network

FLOAT_TOL = 1e-12


class KernelError(ValueError):
    """Invalid kernel, measure or transform precondition."""


class NotStationaryError(KernelError):
    pass


class UnreachableError(KernelError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


# ---------------------------------------------------------------- spaces


class StateSpace:
    """Indexed sequence of hashable labels."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[Hashable]):
        self.labels = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise KernelError("state labels must be unique")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i: int):
        return self.labels[i]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, StateSpace) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KernelError(f"state {label!r} not in space") from None

    def __repr__(self) -> str:
        return f"StateSpace({len(self)} states)"


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


# ---------------------------------------------------------------- kernels


class Kernel:
    """Row-stochastic sparse kernel; ``rows[i]`` maps column index to probability."""

    def __init__(self, space: StateSpace, rows: Sequence[Mapping[int, Fraction | float]],
                 exact: bool | None = None, check: bool = True):
        if len(rows) != len(space):
            raise KernelError("one row per state required")
        self.space = space
        self.rows = tuple({j: v for j, v in r.items() if v != 0} for r in rows)
        if exact is None:
            exact = all(_is_exact(v) for r in self.rows for v in r.values())
        self.exact = exact
        if check:
            self._validate()

    def _validate(self):
        n = len(self.space)
        for i, r in enumerate(self.rows):
            total = 0
            for j, v in r.items():
                if not 0 <= j < n:
                    raise KernelError(f"column {j} out of range in row {i}")
                if v < 0:
                    raise KernelError(f"negative entry in row {self.space[i]!r}")
                total += v
            if self.exact:
                if total != 1:
                    raise KernelError(f"row {self.space[i]!r} sums to {total}, not 1")
            elif abs(total - 1) > FLOAT_TOL * max(1, len(r)):
                raise KernelError(f"row {self.space[i]!r} sums to {total!r}")

    # -- construction helpers

    @classmethod
    def from_function(cls, space: StateSpace, step: Callable[[Hashable], Mapping[Hashable, Fraction | float]],
                      **kw) -> "Kernel":
        """Build from ``step(label) -> {label: prob}``."""
        rows = []
        for lab in space:
            row: dict[int, Fraction | float] = {}
            for b, v in step(lab).items():
                j = space.index(b)
                row[j] = row.get(j, 0) + v
            rows.append(row)
        return cls(space, rows, **kw)

    @classmethod
    def identity(cls, space: StateSpace, exact: bool = True) -> "Kernel":
        one = Fraction(1) if exact else 1.0
        return cls(space, [{i: one} for i in range(len(space))], exact=exact)

    @classmethod
    def from_dense(cls, space: StateSpace, matrix, exact: bool | None = None) -> "Kernel":
        rows = [{j: v for j, v in enumerate(r) if v != 0} for r in matrix]
        return cls(space, rows, exact=exact)

    # -- access

    def __len__(self) -> int:
        return len(self.space)

    def entry(self, i: int, j: int):
        return self.rows[i].get(j, 0)

    def __call__(self, a, b):
        """Transition probability between labels ``a`` and ``b``."""
        return self.entry(self.space.index(a), self.space.index(b))

    def row(self, a) -> dict:
        return {self.space[j]: v for j, v in self.rows[self.space.index(a)].items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, Kernel) and self.space == other.space and self.rows == other.rows

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        return f"Kernel({len(self)} states, {kind})"

    @cached_property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def successors(self, i: int) -> Iterable[int]:
        return self.rows[i].keys()

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pred: list[list[int]] = [[] for _ in range(len(self))]
        for i, r in enumerate(self.rows):
            for j in r:
                pred[j].append(i)
        return tuple(tuple(p) for p in pred)

    # -- conversion

    def to_float(self) -> "Kernel":
        if not self.exact:
            return self
        return Kernel(self.space, [{j: float(v) for j, v in r.items()} for r in self.rows],
                      exact=False, check=False)

    def to_csr(self) -> sp.csr_matrix:
        n = len(self)
        rows, cols, vals = [], [], []
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                rows.append(i)
                cols.append(j)
                vals.append(float(v))
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def to_fmpq_mat(self):
        import flint

        n = len(self)
        m = flint.fmpq_mat(n, n)
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                m[i, j] = _to_fmpq(v)
        return m

    # -- algebra

    def matmul(self, other: "Kernel") -> "Kernel":
        if self.space != other.space:
            raise KernelError("space mismatch")
        out = []
        for r in self.rows:
            acc: dict[int, Fraction | float] = {}
            for j, v in r.items():
                for l, w in other.rows[j].items():
                    acc[l] = acc.get(l, 0) + v * w
            out.append(acc)
        return Kernel(self.space, out, exact=self.exact and other.exact, check=False)

    def power(self, n: int) -> "Kernel":
        if n < 0:
            raise KernelError("negative power")
        result = Kernel.identity(self.space, self.exact)
        base = self
        while n:
            if n & 1:
                result = result.matmul(base)
            n >>= 1
            if n:
                base = base.matmul(base)
        return result

    def push(self, dist: Mapping[int, Fraction | float]) -> dict[int, Fraction | float]:
        """One step of a distribution (index-keyed)."""
        out: dict[int, Fraction | float] = {}
        for i, m in dist.items():
            for j, v in self.rows[i].items():
                out[j] = out.get(j, 0) + m * v
        return out

    def left_apply(self, weights: Sequence) -> list:
        """Row vector times kernel: ``(mu P)(j) = sum_i mu(i) P(i, j)``."""
        out = [0 * weights[0]] * len(self) if len(weights) else []
        for i, r in enumerate(self.rows):
            wi = weights[i]
            if wi == 0:
                continue
            for j, v in r.items():
                out[j] = out[j] + wi * v
        return out

    def transpose_rows(self) -> list[dict[int, Fraction | float]]:
        cols: list[dict[int, Fraction | float]] = [dict() for _ in range(len(self))]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def relabel(self, space: StateSpace) -> "Kernel":
        if len(space) != len(self.space):
            raise KernelError("relabel size mismatch")
        return Kernel(space, self.rows, exact=self.exact, check=False)

    def support_digraph(self) -> list[list[int]]:
        return [sorted(r) for r in self.rows]


def _to_fmpq(v):
    import flint

    if isinstance(v, Fraction):
        return flint.fmpq(v.numerator, v.denominator)
    if isinstance(v, int):
        return flint.fmpq(v)
    return flint.fmpq(Fraction(v).numerator, Fraction(v).denominator)


def _from_fmpq(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


# ---------------------------------------------------------------- measures


@dataclass(frozen=True)
class Measure:
    """Positive (unnormalised) weights over a state space."""

    space: StateSpace
    weights: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.space):
            raise KernelError("one weight per state required")

    def __call__(self, label):
        return self.weights[self.space.index(label)]

    def __getitem__(self, i: int):
        return self.weights[i]

    @classmethod
    def counting(cls, space: StateSpace, exact: bool = True) -> "Measure":
        return cls(space, (Fraction(1) if exact else 1.0,) * len(space))

    @classmethod
    def from_function(cls, space: StateSpace, fn: Callable[[Hashable], Fraction | float]) -> "Measure":
        return cls(space, tuple(fn(lab) for lab in space))

    @property
    def exact(self) -> bool:
        return all(_is_exact(w) for w in self.weights)

    def total(self):
        return sum(self.weights)

    def restrict(self, labels: Sequence) -> "Measure":
        space = StateSpace(labels)
        return Measure(space, tuple(self(lab) for lab in labels))


@dataclass(frozen=True)
class StateFunction:
    space: StateSpace
    values: tuple

    @property
    def support(self) -> frozenset:
        return frozenset(self.space[i] for i, v in enumerate(self.values) if v != 0)


# ---------------------------------------------------------------- operations


def kernel_power_apply(P: Kernel, n: int, start) -> dict:
    """Exact (or float) ``n``-step distribution from the state ``start``."""
    if n < 0:
        raise KernelError("n must be >= 0")
    one = Fraction(1) if P.exact else 1.0
    dist = {P.space.index(start): one}
    for _ in range(n):
        dist = P.push(dist)
    return {P.space[j]: v for j, v in sorted(dist.items()) if v != 0}


def support_gcd(weights: Sequence) -> int:
    """gcd of the positive indices ``i >= 1`` carrying weight; 0 if none."""
    idx = [i for i, w in enumerate(weights) if i >= 1 and w > 0]
    return reduce(math.gcd, idx, 0)


@dataclass(frozen=True)
class Mixture:
    kernel: Kernel
    gcd: int


def mixture(P: Kernel, weights: Sequence) -> Mixture:
    """``sum_i p_i P^i`` together with the gcd of the support of ``(p_1, ..., p_m)``."""
    if any(w < 0 for w in weights):
        raise KernelError("mixture weights must be nonnegative")
    total = sum(weights)
    if (P.exact and all(_is_exact(w) for w in weights) and total != 1) or abs(float(total) - 1) > 1e-12:
        raise KernelError(f"mixture weights sum to {total}, not 1")
    exact = P.exact and all(_is_exact(w) for w in weights)
    acc: list[dict[int, Fraction | float]] = [dict() for _ in range(len(P))]
    power = Kernel.identity(P.space, P.exact)
    for i, w in enumerate(weights):
        if i > 0:
            power = power.matmul(P)
        if w == 0:
            continue
        for r, row in enumerate(power.rows):
            dst = acc[r]
            for j, v in row.items():
                dst[j] = dst.get(j, 0) + w * v
    return Mixture(Kernel(P.space, acc, exact=exact), support_gcd(weights))


def lazy(P: Kernel) -> Kernel:
    half = Fraction(1, 2) if P.exact else 0.5
    return mixture(P, [half, half]).kernel


@dataclass
class StationarityReport:
    stationary: bool
    reversible: bool
    worst_stationary: float
    worst_reversible: float
    stationary_witness: object = None
    reversible_witness: object = None


def check_stationary_reversible(P: Kernel, pi: Measure, tol: float = 1e-12) -> StationarityReport:
    """Exact verdicts on exact input, max absolute violation (with tolerance) otherwise."""
    if pi.space != P.space:
        raise KernelError("space mismatch between kernel and measure")
    exact = P.exact and pi.exact
    flow_in = P.left_apply(pi.weights)
    worst_s, wit_s = 0.0, None
    for j, (a, b) in enumerate(zip(flow_in, pi.weights)):
        d = abs(a - b)
        if d > worst_s:
            worst_s, wit_s = float(d), P.space[j]
    worst_r, wit_r = 0.0, None
    for i, r in enumerate(P.rows):
        for j, v in r.items():
            d = abs(pi.weights[i] * v - pi.weights[j] * P.rows[j].get(i, 0))
            if d > worst_r:
                worst_r, wit_r = float(d), (P.space[i], P.space[j])
    # reversed pairs with zero forward entry are covered from the other side
    if exact:
        stationary = all(a == b for a, b in zip(flow_in, pi.weights))
        reversible = wit_r is None
    else:
        stationary, reversible = worst_s <= tol, worst_r <= tol
    return StationarityReport(stationary, reversible, worst_s, worst_r, wit_s, wit_r)


def _require_stationary(P: Kernel, pi: Measure, tol: float):
    rep = check_stationary_reversible(P, pi, tol)
    if not rep.stationary:
        raise NotStationaryError(
            f"measure is not stationary (worst violation {rep.worst_stationary:.3g} at {rep.stationary_witness!r})")
    return rep


def time_reversal(P: Kernel, pi: Measure, tol: float = 1e-12) -> Kernel:
    """``P*(x, y) = pi(y) P(y, x) / pi(x)``; ``pi`` must be stationary for ``P``."""
    _require_stationary(P, pi, tol)
    w = pi.weights
    cols = P.transpose_rows()
    rows = [{i: w[i] * v / w[j] for i, v in col.items()} for j, col in enumerate(cols)]
    return Kernel(P.space, rows, exact=P.exact and pi.exact)


def additive_symmetrization(P: Kernel, pi: Measure, tol: float = 1e-12) -> Kernel:
    star = time_reversal(P, pi, tol)
    half = Fraction(1, 2) if P.exact and pi.exact else 0.5
    rows = []
    for r1, r2 in zip(P.rows, star.rows):
        acc = {j: half * v for j, v in r1.items()}
        for j, v in r2.items():
            acc[j] = acc.get(j, 0) + half * v
        rows.append(acc)
    S = Kernel(P.space, rows, exact=star.exact)
    if not check_stationary_reversible(S, pi, tol).reversible:
        raise KernelError("symmetrization failed detailed balance")
    return S


# ---------------------------------------------------------------- linear solves


def solve_exact(A: list[list[Fraction]] | object, B: list[list[Fraction]] | object) -> list[list[Fraction]]:
    """Exact solution of ``A X = B`` over the rationals (flint ``fmpq_mat``)."""
    import flint

    Am = A if isinstance(A, flint.fmpq_mat) else _dense_fmpq(A)
    Bm = B if isinstance(B, flint.fmpq_mat) else _dense_fmpq(B)
    X = Am.solve(Bm)
    return [[_from_fmpq(X[i, j]) for j in range(X.ncols())] for i in range(X.nrows())]


def _dense_fmpq(M):
    import flint

    rows = len(M)
    cols = len(M[0]) if rows else 0
    out = flint.fmpq_mat(rows, cols)
    for i, r in enumerate(M):
        for j, v in enumerate(r):
            if v != 0:
                out[i, j] = _to_fmpq(v)
    return out


def _reach_backward(P: Kernel, targets: Iterable[int]) -> set[int]:
    seen = set(targets)
    stack = list(seen)
    pred = P.predecessors
    while stack:
        j = stack.pop()
        for i in pred[j]:
            if i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def _reach_forward_avoiding(P: Kernel, sources: Iterable[int], avoid: set[int]) -> set[int]:
    seen: set[int] = set()
    stack = []
    for s in sources:
        for j in P.rows[s]:
            if j not in avoid and j not in seen:
                seen.add(j)
                stack.append(j)
    while stack:
        i = stack.pop()
        for j in P.rows[i]:
            if j not in avoid and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def hitting_distribution(P: Kernel, targets: Sequence, sources: Sequence | None = None):
    """``h[x][b] = P_x[X_{T} = b]`` for ``T`` the hitting time of ``targets`` (time 0 included).

    Returns a dict over the non-target states reachable from ``sources`` (all states if
    omitted), each mapping to a dict over target indices. Raises if some such state
    cannot reach the targets.
    """
    tgt = [P.space.index(b) for b in targets]
    tset = set(tgt)
    if sources is None:
        comp = [i for i in range(len(P)) if i not in tset]
    else:
        comp = sorted(_reach_forward_avoiding(P, [P.space.index(a) for a in sources], tset)
                      | {P.space.index(a) for a in sources} - tset)
        comp = sorted(set(comp) | _reach_forward_avoiding(P, comp, tset))
    can = _reach_backward(P, tgt)
    for x in comp:
        if x not in can:
            raise UnreachableError(f"target set unreachable from state {P.space[x]!r}", P.space[x])
    pos = {x: r for r, x in enumerate(comp)}
    if not comp:
        return {}, tgt
    if P.exact:
        import flint

        n = len(comp)
        A = flint.fmpq_mat(n, n)
        B = flint.fmpq_mat(n, len(tgt))
        tpos = {b: c for c, b in enumerate(tgt)}
        for r, x in enumerate(comp):
            A[r, r] = flint.fmpq(1)
            for j, v in P.rows[x].items():
                if j in pos:
                    A[r, pos[j]] = A[r, pos[j]] - _to_fmpq(v)
                else:
                    B[r, tpos[j]] = B[r, tpos[j]] + _to_fmpq(v)
        X = A.solve(B)
        h = {x: {b: _from_fmpq(X[r, c]) for c, b in enumerate(tgt) if X[r, c] != 0} for r, x in enumerate(comp)}
    else:
        n = len(comp)
        tpos = {b: c for c, b in enumerate(tgt)}
        ar, ac, av, br, bc, bv = [], [], [], [], [], []
        for r, x in enumerate(comp):
            ar.append(r)
            ac.append(r)
            av.append(1.0)
            for j, v in P.rows[x].items():
                if j in pos:
                    ar.append(r)
                    ac.append(pos[j])
                    av.append(-float(v))
                else:
                    br.append(r)
                    bc.append(tpos[j])
                    bv.append(float(v))
        A = sp.csc_matrix((av, (ar, ac)), shape=(n, n))
        B = sp.csc_matrix((bv, (br, bc)), shape=(n, len(tgt))).toarray()
        X = spla.splu(A).solve(B)
        h = {x: {b: float(X[r, c]) for c, b in enumerate(tgt) if X[r, c] != 0} for r, x in enumerate(comp)}
    return h, tgt


def induced_chain(P: Kernel, A: Sequence, pi: Measure | None = None) -> Kernel:
    """Kernel of the chain observed only on ``A``: ``Q(a, b) = P_a[X_{T_A^+} = b]``.

    If ``pi`` is given and ``P`` is reversible for it, the output is checked to be
    reversible for the restriction of ``pi``.
    """
    A = list(A)
    if not A:
        raise KernelError("empty target set")
    idx = [P.space.index(a) for a in A]
    aset = set(idx)
    h, _ = hitting_distribution(P, A, sources=A)
    apos = {b: c for c, b in enumerate(idx)}
    rows = []
    for a in idx:
        acc: dict[int, Fraction | float] = {}
        for j, v in P.rows[a].items():
            if j in aset:
                acc[apos[j]] = acc.get(apos[j], 0) + v
            else:
                for b, w in h[j].items():
                    acc[apos[b]] = acc.get(apos[b], 0) + v * w
        rows.append(acc)
    Q = Kernel(StateSpace(A), rows, exact=P.exact)
    if pi is not None and check_stationary_reversible(P, pi).reversible:
        if not check_stationary_reversible(Q, pi.restrict(A)).reversible:
            raise KernelError("induced chain lost reversibility")
    return Q


# ---------------------------------------------------------------- lumping


def lump_network(N: Network, partition: Sequence[Iterable[int]], labels: Sequence | None = None) -> Network:
    """Collapse blocks into single vertices, summing conductances; inner edges become loops."""
    blocks = [tuple(sorted(b)) for b in partition]
    where: dict[int, int] = {}
    for bi, b in enumerate(blocks):
        for v in b:
            if v in where:
                raise KernelError(f"vertex {v} appears in two blocks")
            where[v] = bi
    if len(where) != N.graph.n:
        missing = sorted(set(range(N.graph.n)) - set(where))
        raise KernelError(f"partition misses vertices {missing[:5]}")
    weights: dict[tuple[int, int], Fraction | float] = {}
    for (u, v), c in N.conductance.items():
        key = tuple(sorted((where[u], where[v])))
        weights[key] = weights.get(key, 0) + c
    return Network.from_weights(len(blocks), weights,
                                labels=tuple(labels) if labels is not None else tuple(blocks))


def network_kernel(N: Network) -> tuple[Kernel, Measure]:
    """Weighted walk ``P(v, u) = c_{uv}/c_v`` and its reversible measure ``c_v``."""
    g = N.graph
    space = StateSpace(N.labels if N.labels is not None else range(g.n))
    rows = []
    for v in range(g.n):
        cv = N.vertex_weight(v)
        if cv == 0:
            raise GraphError(f"isolated vertex {v}")
        rows.append({u: N.c(u, v) / cv for u in g.adjacency[v]})
    return Kernel(space, rows, exact=N.exact), Measure(space, N.vertex_weights)


def kernel_network(P: Kernel, pi: Measure, tol: float = 1e-12) -> Network:
    """Network with conductances ``pi(x) P(x, y)``; ``P`` must be reversible for ``pi``."""
    if not check_stationary_reversible(P, pi, tol).reversible:
        raise KernelError("kernel is not reversible for the measure")
    weights = {}
    for i, r in enumerate(P.rows):
        for j, v in r.items():
            if i <= j:
                weights[(i, j)] = pi.weights[i] * v
    return Network.from_weights(len(P), weights, labels=P.space.labels)


# ---------------------------------------------------------------- renewal


@dataclass(frozen=True)
class RenewalReport:
    q: tuple
    gcd: int
    tail_inf: Fraction | float
    n0: int


def renewal_hitting(weights: Sequence, L: int, n0: int | None = None) -> RenewalReport:
    """Probability ``q_l`` that a walk on ``Z_+`` with jump law ``weights`` ever visits ``l``.

    The zero jump only delays the walk, so the recursion uses ``p_j / (1 - p_0)``.
    ``tail_inf`` is ``min_{n0 <= l <= L} q_l`` (``n0`` defaults to ``L // 2``).
    """
    if any(w < 0 for w in weights):
        raise KernelError("weights must be nonnegative")
    total = sum(weights)
    if all(_is_exact(w) for w in weights):
        if total != 1:
            raise KernelError("weights must sum to 1")
    elif abs(total - 1) > 1e-12:
        raise KernelError("weights must sum to 1")
    p0 = weights[0]
    if p0 >= 1:
        raise KernelError("all mass at 0: the walk never moves")
    move = [w / (1 - p0) for w in weights]
    one = Fraction(1) if _is_exact(p0) else 1.0
    q = [one]
    for l in range(1, L + 1):
        q.append(sum((move[j] * q[l - j] for j in range(1, min(l, len(weights) - 1) + 1)), start=0 * one))
    n0 = L // 2 if n0 is None else n0
    return RenewalReport(tuple(q), support_gcd(weights), min(q[n0:]) if n0 <= L else one, n0)
