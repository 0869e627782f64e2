"""Reversible auxiliary chain on reversal classes, built from a backtrack-probability floor.

Given a candidate kernel ``D`` on a reversal-closed state space with
``D(a, a^r) >= p`` for every state, the lazy chain ``X = 1/2 (I + D)`` can be
generated together with i.i.d. Bernoulli(p) marks ``xi_t`` such that a mark
forces the candidate to be the reversal. Between marks ``X`` moves by the lazy
residual kernel ``K_L``; at a mark it lands uniformly on one of the two
orientations of its current class. Reading the class at the marks gives a
chain on classes with kernel

    W(A, B) = 1/|A| * sum_{w in A, w' in B} G(w, w'),  G = p (I - (1 - p) K_L)^{-1}.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graphs import Graph, condition_two_radius
from .kernels import Kernel, KernelError, Measure, StateSpace, _from_fmpq, _to_fmpq
from .walks import pair_classes, reversal_map


class FloorError(KernelError):
    """The requested floor exceeds what the kernel provides."""


# ---------------------------------------------------------------- floors


@dataclass(frozen=True)
class FloorReport:
    floor: Fraction | float
    argmin: tuple | None
    available: bool

    @property
    def diagnostic(self) -> str:
        if self.available:
            return f"backtrack floor {self.floor} attained at {self.argmin!r}"
        return (f"backtrack floor is 0: the reversal of {self.argmin!r} is never proposed, "
                "so no mark can force a backtrack (see reversal_access)")


def backtrack_floor(P: Kernel) -> FloorReport:
    """``min_a P(a, a^r)`` with a minimiser."""
    rev = reversal_map(P.space)
    best, arg = None, None
    for i, r in enumerate(P.rows):
        v = r.get(rev[i], 0)
        if best is None or v < best:
            best, arg = v, P.space[i]
    best = best if best is not None else 0
    return FloorReport(best, arg, best > 0)


@dataclass(frozen=True)
class ExplicitConstants:
    R: int
    M: int
    d: int
    p: Fraction


def explicit_floor_constants(g: Graph, R: int | None = None) -> ExplicitConstants:
    """Averaging window ``M = 4R + 1`` and floor ``(d - 1)^{-M} / (2 (M + 1))``.

    ``R`` defaults to the least radius for which every ball contains a cycle.
    """
    if R is None:
        R = condition_two_radius(g)
        if math.isinf(R):
            raise KernelError("no radius makes every ball contain a cycle")
    d = g.max_degree
    if d < 2:
        raise KernelError("maximum degree must be at least 2")
    M = 4 * int(R) + 1
    return ExplicitConstants(int(R), M, d, Fraction(1, (d - 1) ** M * 2 * (M + 1)))


def averaged_kernel(P: Kernel, M: int) -> Kernel:
    """``D = (M + 1)^{-1} sum_{i=0}^{M} P^i``."""
    if M < 0:
        raise KernelError("M must be >= 0")
    w = Fraction(1, M + 1) if P.exact else 1.0 / (M + 1)
    acc = [{i: w} for i in range(len(P))]
    cur = Kernel.identity(P.space, exact=P.exact)
    for _ in range(M):
        cur = cur.matmul(P)
        for i, r in enumerate(cur.rows):
            a = acc[i]
            for j, v in r.items():
                a[j] = a.get(j, 0) + w * v
    return Kernel(P.space, acc, exact=P.exact)


# ---------------------------------------------------------------- residual kernel


@dataclass
class Residual:
    base: Kernel
    p: Fraction | float
    K: Kernel
    K_L: Kernel
    symmetric: bool                       # the reversal identity inherited from the base
    witness: tuple | None = None


def _reversal_identity(K: Kernel, pi: Measure | None) -> tuple | None:
    """First pair violating ``pi(a) K(a, b) = pi(b) K(b^r, a^r)`` (counting ``pi`` when omitted)."""
    rev = reversal_map(K.space)
    w = pi.weights if pi is not None else None
    tol = 0 if K.exact and (pi is None or pi.exact) else 1e-12
    for i, r in enumerate(K.rows):
        for j in set(r) | {rev[i]}:
            lhs = r.get(j, 0) * (w[i] if w else 1)
            rhs = K.rows[rev[j]].get(rev[i], 0) * (w[j] if w else 1)
            if abs(lhs - rhs) > tol:
                return (K.space[i], K.space[j])
    # pairs whose forward entry vanishes are seen from the reversed side
    return None


def residual_kernel(P: Kernel, p, pi: Measure | None = None) -> Residual:
    """``K(a, a^r) = (P(a, a^r) - p)/(1 - p)``, ``K(a, b) = P(a, b)/(1 - p)`` otherwise."""
    p = Fraction(p) if P.exact and not isinstance(p, float) else p
    if not 0 < p < 1:
        raise FloorError("p must lie in (0, 1)")
    floor = backtrack_floor(P)
    if p > floor.floor:
        raise FloorError(f"p = {p} exceeds the backtrack floor {floor.floor} (at {floor.argmin!r})")
    rev = reversal_map(P.space)
    rows = []
    for i, r in enumerate(P.rows):
        acc = {j: v / (1 - p) for j, v in r.items()}
        acc[rev[i]] = (r.get(rev[i], 0) - p) / (1 - p)
        rows.append(acc)
    exact = P.exact and not isinstance(p, float)
    K = Kernel(P.space, rows, exact=exact)
    half = Fraction(1, 2) if exact else 0.5
    lazy_rows = []
    for i, r in enumerate(K.rows):
        acc = {j: half * v for j, v in r.items()}
        acc[i] = acc.get(i, 0) + half
        lazy_rows.append(acc)
    K_L = Kernel(P.space, lazy_rows, exact=exact)
    wit = _reversal_identity(K, pi)
    return Residual(P, p, K, K_L, wit is None, wit)


# ---------------------------------------------------------------- exact W


@dataclass
class ReversibleAuxiliary:
    residual: Residual
    classes: tuple                 # class labels: sorted member tuples
    class_of: tuple                # state index -> class index
    green: object                  # p (I - (1-p) K_L)^{-1}, list of rows (exact) or ndarray
    W: Kernel
    pi_W: Measure
    reversible: bool
    witness: tuple | None = None

    @property
    def p(self):
        return self.residual.p

    @property
    def symmetric(self) -> bool:
        """``W(A, B) = W(B, A)`` for every pair of classes."""
        n = len(self.W)
        return all(self.W.rows[i].get(j, 0) == self.W.rows[j].get(i, 0)
                   if self.W.exact else abs(self.W.rows[i].get(j, 0) - self.W.rows[j].get(i, 0)) <= 1e-12
                   for i in range(n) for j in self.W.rows[i])


def _green_exact(K_L: Kernel, p: Fraction) -> list[list[Fraction]]:
    import flint

    n = len(K_L)
    A = flint.fmpq_mat(n, n)
    q = _to_fmpq(1 - p)
    for i, r in enumerate(K_L.rows):
        A[i, i] = flint.fmpq(1)
        for j, v in r.items():
            A[i, j] = A[i, j] - q * _to_fmpq(v)
    B = flint.fmpq_mat(n, n)
    pp = _to_fmpq(p)
    for i in range(n):
        B[i, i] = pp
    X = A.solve(B)
    return [[_from_fmpq(X[i, j]) for j in range(n)] for i in range(n)]


def _green_float(K_L: Kernel, p: float) -> np.ndarray:
    n = len(K_L)
    A = np.eye(n) - (1 - p) * K_L.to_dense().astype(float)
    return np.linalg.solve(A, p * np.eye(n))


def exact_W(res: Residual, pi_base: Measure | None = None) -> ReversibleAuxiliary:
    """Class chain read off at the marks, by one linear solve.

    ``pi_base`` defaults to counting measure; ``pi_W`` of a class is ``pi_base`` of
    any member (members must agree). Row sums and reversibility are checked.
    """
    K_L, p = res.K_L, res.p
    classes, cls = pair_classes(K_L.space)
    exact = K_L.exact
    members = [[] for _ in classes]
    for i, c in enumerate(cls):
        members[c].append(i)
    if exact:
        G = _green_exact(K_L, p)
        rows = []
        for c, mem in enumerate(members):
            acc: dict[int, Fraction] = {}
            scale = Fraction(1, len(mem))
            for w in mem:
                for j, v in enumerate(G[w]):
                    if v:
                        acc[cls[j]] = acc.get(cls[j], 0) + scale * v
            rows.append(acc)
    else:
        G = _green_float(K_L, float(p))
        n_c = len(classes)
        lump = np.zeros((len(cls), n_c))
        lump[np.arange(len(cls)), cls] = 1.0
        Wd = np.zeros((n_c, n_c))
        for c, mem in enumerate(members):
            Wd[c] = G[mem].sum(axis=0) @ lump / len(mem)
        rows = [{j: float(v) for j, v in enumerate(r) if v > 0} for r in Wd]
    space = StateSpace(classes)
    W = Kernel(space, rows, exact=exact)
    if pi_base is None:
        pi_W = Measure.counting(space, exact=exact)
    else:
        vals = []
        for mem in members:
            ws = {pi_base.weights[i] for i in mem}
            if len(ws) != 1 and (exact or max(ws) - min(ws) > 1e-12):
                raise KernelError(f"measure differs inside the class of {K_L.space[mem[0]]!r}")
            vals.append(pi_base.weights[mem[0]])
        pi_W = Measure(space, tuple(vals))
    wit = None
    tol = 0 if exact and pi_W.exact else 1e-12
    for i, r in enumerate(W.rows):
        for j, v in r.items():
            if abs(pi_W.weights[i] * v - pi_W.weights[j] * W.rows[j].get(i, 0)) > tol:
                wit = (classes[i], classes[j])
                break
        if wit:
            break
    return ReversibleAuxiliary(res, classes, tuple(cls), G, W, pi_W, wit is None, wit)


def truncated_W(res: Residual, N: int) -> np.ndarray | list[list]:
    """Series oracle ``1/|A| sum_{i<=N} sum_{w, w'} K_L^i(w, w') (1 - p)^i p`` (dense, classes x classes).

    Computed by repeated row-vector products, independently of the linear solve.
    """
    K_L, p = res.K_L, res.p
    classes, cls = pair_classes(K_L.space)
    n_c = len(classes)
    exact = K_L.exact
    zero = Fraction(0) if exact else 0.0
    out = [[zero] * n_c for _ in range(n_c)]
    members = [[] for _ in classes]
    for i, c in enumerate(cls):
        members[c].append(i)
    for c, mem in enumerate(members):
        vec = {w: (Fraction(1, len(mem)) if exact else 1.0 / len(mem)) for w in mem}
        weight = p
        for _ in range(N + 1):
            for j, v in vec.items():
                out[c][cls[j]] += weight * v
            nxt: dict[int, object] = {}
            for i, v in vec.items():
                for j, w in K_L.rows[i].items():
                    nxt[j] = nxt.get(j, zero) + v * w
            vec = nxt
            weight = weight * (1 - p)
    return out


def series_gap(aux: ReversibleAuxiliary, N: int) -> tuple:
    """Per-row missing mass and total variation between ``W`` and its order-``N`` series."""
    T = truncated_W(aux.residual, N)
    missing, tv = [], []
    for i, row in enumerate(T):
        Wrow = aux.W.rows[i]
        diffs = [Wrow.get(j, 0) - row[j] for j in range(len(row))]
        missing.append(sum(diffs))
        tv.append(sum(abs(d) for d in diffs) / 2)
    return missing, tv


# ---------------------------------------------------------------- coupled simulation


@dataclass
class CoupledRecord:
    states: np.ndarray             # X_0..X_T (state indices)
    candidates: np.ndarray         # Z_1..Z_T
    xi: np.ndarray                 # xi_0..xi_{T-1}
    accepted: np.ndarray
    marks: np.ndarray              # times t with xi_t = 1
    classes: np.ndarray            # e_0, e_1, ... (class indices)
    space: StateSpace
    class_of: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "state", "candidate", "xi", "accepted"])
        for t in range(len(self.xi)):
            w.writerow([t, _fmt(self.space[self.states[t]]), _fmt(self.space[self.candidates[t]]),
                        int(self.xi[t]), int(self.accepted[t])])
        return buf.getvalue()


def _fmt(label) -> str:
    return "-".join(str(x) for x in label) if isinstance(label, tuple) else str(label)


class CoupledSampler:
    """Candidate tables with the reversal first, so ``U <= p`` always proposes ``a^r``."""

    def __init__(self, base: Kernel, p: float):
        floor = backtrack_floor(base)
        if p > floor.floor:
            raise FloorError(f"p = {p} exceeds the backtrack floor {floor.floor}")
        self.base, self.p = base, float(p)
        rev = reversal_map(base.space)
        self.rev = rev
        self.cols, self.cum = [], []
        for i, r in enumerate(base.rows):
            order = [rev[i]] + sorted(j for j in r if j != rev[i])
            probs = np.array([float(r.get(j, 0)) for j in order])
            c = np.cumsum(probs)
            c[-1] = 1.0
            self.cols.append(order)
            self.cum.append(c.tolist())
        self.classes, self.class_of = pair_classes(base.space)
        self.members = [[] for _ in self.classes]
        for i, c in enumerate(self.class_of):
            self.members[c].append(i)

    def run(self, start_class: int, steps: int, rng: np.random.Generator) -> CoupledRecord:
        import bisect

        mem = self.members[start_class]
        x = mem[int(rng.integers(len(mem)))]
        us = rng.random(steps)
        coins = rng.random(steps) < 0.5
        X = np.empty(steps + 1, dtype=np.int64)
        Z = np.empty(steps, dtype=np.int64)
        X[0] = x
        cols, cum, p = self.cols, self.cum, self.p
        for t in range(steps):
            u = us[t]
            z = cols[x][bisect.bisect_right(cum[x], u)] if u < 1.0 else cols[x][-1]
            Z[t] = z
            if coins[t]:
                x = z
            X[t + 1] = x
        xi = us <= p
        marks = np.flatnonzero(xi)
        cl = np.asarray(self.class_of)
        classes = np.concatenate([[start_class], cl[Z[marks]]])
        return CoupledRecord(X, Z, xi, coins, marks, classes, self.base.space, self.class_of)


def sample_coupled(base: Kernel, p, start_class: int, steps: int, seed: int | np.random.Generator = 0) -> CoupledRecord:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return CoupledSampler(base, float(p)).run(start_class, steps, rng)


@dataclass
class EmpiricalW:
    counts: np.ndarray                  # transitions e_n -> e_{n+1}
    W_hat: np.ndarray
    radius: np.ndarray                  # Wilson 95% half-widths
    row_tv: np.ndarray | None
    x_returns: int
    q_returns: int
    ratio: float
    regenerations: int
    orientation_pvalue: float | None = None
    extra: dict = field(default_factory=dict)


MIN_REGENERATIONS = 10_000


def empirical_W_and_returns(rec: CoupledRecord, W: Kernel | None = None,
                            min_regenerations: int = MIN_REGENERATIONS) -> EmpiricalW:
    """Class-transition frequencies with Wilson intervals, return counts, and the orientation test."""
    from scipy import stats

    e = rec.classes
    n_reg = len(e) - 1
    if n_reg < min_regenerations:
        raise ValueError(f"only {n_reg} regenerations; need at least {min_regenerations}")
    n_c = len(pair_classes(rec.space)[0])
    counts = np.zeros((n_c, n_c), dtype=np.int64)
    np.add.at(counts, (e[:-1], e[1:]), 1)
    tot = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        W_hat = np.where(tot > 0, counts / np.maximum(tot, 1), 0.0)
        z = 1.959963984540054
        n = np.maximum(tot, 1)
        denom = 1 + z * z / n
        radius = z * np.sqrt(W_hat * (1 - W_hat) / n + z * z / (4 * n * n)) / denom
    row_tv = None
    if W is not None:
        Wd = W.to_dense().astype(float)
        row_tv = 0.5 * np.abs(W_hat - Wd).sum(axis=1)
    cl = np.asarray(rec.class_of)
    x_ret = int((cl[rec.states[1:]] == e[0]).sum())
    q_ret = int((e[1:] == e[0]).sum())
    # orientation of X just after a mark, given its class: should be a fair coin
    after = rec.states[rec.marks + 1]
    cls_after = cl[after]
    members = [sorted(np.flatnonzero(cl == c)) for c in range(n_c)]
    first = np.array([m[0] for m in members])
    two = np.array([len(m) == 2 for m in members])
    sel = two[cls_after]
    heads = int((after[sel] == first[cls_after[sel]]).sum())
    m = int(sel.sum())
    pval = float(stats.chisquare([heads, m - heads]).pvalue) if m else None
    ratio = x_ret / q_ret if q_ret else math.inf
    return EmpiricalW(counts, W_hat, radius, row_tv, x_ret, q_ret, ratio, n_reg, pval)


def build_auxiliary(base: Kernel, p=None, pi: Measure | None = None) -> ReversibleAuxiliary:
    """Residual plus exact ``W``; ``p`` defaults to the backtrack floor of ``base``."""
    floor = backtrack_floor(base)
    if not floor.available:
        raise FloorError(floor.diagnostic)
    p = floor.floor if p is None else p
    return exact_W(residual_kernel(base, p, pi), pi)


def class_edge(label: tuple) -> tuple:
    """Undirected edge of a directed-edge class label ``((x, y), (y, x))``."""
    a = label[0]
    return (min(a[0], a[-1]), max(a[0], a[-1])) if len(a) == 2 else a


def lifted_capacity(base: Kernel, p, A: Sequence[int], Z: Sequence[int]) -> float:
    """Capacity of the class chain between class sets ``A`` and ``Z`` without forming ``W``.

    ``h(x)`` is the probability, from state ``x``, that the first mark lands in a ``Z``
    class before any mark lands in an ``A`` class; marks in other classes re-randomise
    the orientation. This is a sparse system on the base states. Counting measure on
    classes is assumed.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    res = residual_kernel(base.to_float() if base.exact else base, float(p))
    K_L = res.K_L
    classes, cls = pair_classes(K_L.space)
    members = [[] for _ in classes]
    for i, c in enumerate(cls):
        members[c].append(i)
    Aset, Zset = set(A), set(Z)
    if Aset & Zset:
        raise KernelError("A and Z must be disjoint")
    n = len(K_L)
    q = 1 - float(p)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    for i, r in enumerate(K_L.rows):
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for j, v in r.items():
            rows.append(i)
            cols.append(j)
            vals.append(-q * float(v))
        c = cls[i]
        if c in Zset:
            rhs[i] += float(p)
        elif c not in Aset:
            for w in members[c]:
                rows.append(i)
                cols.append(w)
                vals.append(-float(p) / len(members[c]))
    M = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    h = spla.splu(M).solve(rhs)
    return float(sum(np.mean([h[w] for w in members[a]]) for a in A))
