"""Cayley graphs of finite abelian groups and the straight-path family.

For a generator ``s`` and length ``k`` the straight paths are
``alpha_h = (h, h + s, ..., h + k s)``; the family consists of all of them and
their reversals. The walk observed only on this family is checked against the
symmetries that translation and negation force on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .graphs import Graph, GraphError, build_graph
from .kernels import Kernel, KernelError, induced_chain, lazy
from .stationary import IdentityReport
from .walks import knbrw_kernel, reverse

Element = tuple[int, ...]


@dataclass(frozen=True)
class CayleySpec:
    factors: tuple[int, ...]
    generators: tuple[Element, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(n) for n in self.factors))
        gens = tuple(self.reduce(s) for s in self.generators)
        object.__setattr__(self, "generators", gens)
        if any(n < 1 for n in self.factors):
            raise GraphError("cyclic factors must be positive")
        for s in gens:
            if len(s) != len(self.factors):
                raise GraphError(f"generator {s} has the wrong number of coordinates")
            if not any(s):
                raise GraphError("the identity is not allowed as a generator")
            if self.neg(s) not in gens:
                raise GraphError(f"generating set is not symmetric: {self.neg(s)} missing")

    def reduce(self, x: Sequence[int]) -> Element:
        return tuple(int(a) % n for a, n in zip(x, self.factors))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.factors))

    def neg(self, x: Element) -> Element:
        return tuple((-a) % n for a, n in zip(x, self.factors))

    def scale(self, x: Element, m: int) -> Element:
        return tuple((m * a) % n for a, n in zip(x, self.factors))

    def order(self, x: Element) -> int:
        o = 1
        for a, n in zip(x, self.factors):
            o = math.lcm(o, n // math.gcd(a, n))
        return o

    @property
    def elements(self) -> list[Element]:
        return [tuple(x) for x in product(*(range(n) for n in self.factors))]

    @classmethod
    def standard(cls, *factors: int) -> "CayleySpec":
        """``Z_{n_1} x ... x Z_{n_r}`` with generators ``+-e_i``."""
        r = len(factors)
        gens = set()
        for i in range(r):
            e = [0] * r
            e[i] = 1
            gens.add(tuple(x % factors[i] if j == i else 0 for j, x in enumerate(e)))
            e[i] = -1
            gens.add(tuple(x % factors[i] if j == i else 0 for j, x in enumerate(e)))
        return cls(tuple(factors), tuple(sorted(gens)))


@dataclass(frozen=True)
class CayleyGraph:
    spec: CayleySpec
    graph: Graph
    elements: tuple[Element, ...]

    def index(self, x: Element) -> int:
        return int(np.ravel_multi_index(self.spec.reduce(x), self.spec.factors))

    def element(self, v: int) -> Element:
        return self.elements[v]


def cayley_graph(spec: CayleySpec) -> CayleyGraph:
    """Vertices are the group elements (row-major order); ``h ~ h + s`` for ``s`` in ``S``."""
    elems = spec.elements
    idx = {x: i for i, x in enumerate(elems)}
    edges = set()
    for x in elems:
        for s in spec.generators:
            y = spec.add(x, s)
            a, b = idx[x], idx[y]
            edges.add((min(a, b), max(a, b)))
    g = build_graph(sorted(edges), n=len(elems), name=f"Cay(Z{spec.factors})")
    if not g.is_connected():
        raise GraphError("generators do not generate the group")
    return CayleyGraph(spec, g, tuple(elems))


# ---------------------------------------------------------------- straight paths


@dataclass
class AlphaFamily:
    cg: CayleyGraph
    s: Element
    k: int
    alpha: dict[Element, tuple[int, ...]]          # h -> alpha_h (vertex indices)
    labels: tuple[tuple[int, ...], ...]           # the family, sorted

    def negate(self, path: Sequence[int]) -> tuple[int, ...]:
        cg = self.cg
        return tuple(cg.index(cg.spec.neg(cg.element(v))) for v in path)

    def translate(self, path: Sequence[int], c: Element) -> tuple[int, ...]:
        cg = self.cg
        return tuple(cg.index(cg.spec.add(cg.element(v), c)) for v in path)

    def base_point(self, label: Sequence[int]) -> Element:
        """The ``h`` with ``label`` in ``{alpha_h, alpha_h^r}`` (identifies classes with the group)."""
        lab = tuple(label)
        for cand in (lab, reverse(lab)):
            h = self.cg.element(cand[0])
            if self.alpha.get(h) == cand:
                return h
        raise KeyError(f"{label!r} is not in the family")


def alpha_family(cg: CayleyGraph, s: Sequence[int], k: int) -> AlphaFamily:
    spec = cg.spec
    s = spec.reduce(s)
    if s not in spec.generators:
        raise GraphError(f"{s} is not a generator")
    if k < 1:
        raise GraphError("k must be >= 1")
    if spec.order(s) <= k:
        raise GraphError(f"order of {s} is {spec.order(s)}, must exceed k = {k}")
    alpha = {}
    for h in cg.elements:
        alpha[h] = tuple(cg.index(spec.add(h, spec.scale(s, i))) for i in range(k + 1))
    fam = set(alpha.values()) | {reverse(a) for a in alpha.values()}
    out = AlphaFamily(cg, s, k, alpha, tuple(sorted(fam)))
    bad = negation_identity_failures(out)
    if bad:
        raise GraphError(f"negation identities fail at {bad[0]}")
    return out


def negation_identity_failures(fam: AlphaFamily) -> list:
    """Check ``-alpha_h = (alpha_{-h-ks})^r`` and ``-(alpha_h^r) = alpha_{-h-ks}`` for every ``h``."""
    spec = fam.cg.spec
    out = []
    for h, a in fam.alpha.items():
        g = spec.neg(spec.add(h, spec.scale(fam.s, fam.k)))
        if fam.negate(a) != reverse(fam.alpha[g]) or fam.negate(reverse(a)) != fam.alpha[g]:
            out.append(h)
    return out


def induced_alpha_kernels(cg: CayleyGraph, s: Sequence[int], k: int, modes: Sequence[str] = ("edge", "vertex"),
                          cap: int = 2_000_000) -> dict[str, tuple[Kernel, AlphaFamily, Kernel]]:
    """For each mode: the walk observed on the family, the family, and the full path-state kernel."""
    fam = alpha_family(cg, s, k)
    out = {}
    for mode in modes:
        P, _ = knbrw_kernel(cg.graph, k, mode, cap)
        missing = [a for a in fam.labels if a not in P.space]
        if missing:
            raise KernelError(f"family state {missing[0]!r} is not a path state of the {mode} walk")
        out[mode] = (induced_chain(P, fam.labels), fam, P)
    return out


def verify_alpha_symmetry(PA: Kernel, fam: AlphaFamily, mode: str = "") -> IdentityReport:
    """Exact checks on the walk observed on the family.

    Counting measure stationary (column sums one), ``P(a, b) = P(b^r, a^r)``, constant
    reversal entry, the four translation families and negation invariance.
    """
    import time

    t0 = time.perf_counter()
    rep = IdentityReport("alpha-family symmetry", fam.cg.graph.name, fam.k, 1, "pass", [], 0.0,
                         {"mode": mode, "states": len(PA)})
    sp = PA.space
    n = len(sp)
    dense = [[PA.rows[i].get(j, 0) for j in range(n)] for i in range(n)]
    cols = [sum(dense[i][j] for i in range(n)) for j in range(n)]
    for j, c in enumerate(cols):
        if c != 1:
            rep.fail({"check": "column sum", "state": sp[j], "value": c})
    rev = [sp.index(reverse(a)) for a in sp]
    for i in range(n):
        for j in range(n):
            if dense[i][j] != dense[rev[j]][rev[i]]:
                rep.fail({"check": "reversal", "a": sp[i], "b": sp[j]})
    back = {dense[i][rev[i]] for i in range(n)}
    rep.details["reversal_entry"] = sorted(back)
    if len(back) != 1:
        rep.fail({"check": "constant reversal entry", "values": sorted(back)})
    elems = fam.cg.elements
    checked = 0
    for c in elems:
        perm = [sp.index(fam.translate(a, c)) for a in sp]
        for i in range(n):
            for j in range(n):
                checked += 1
                if dense[i][j] != dense[perm[i]][perm[j]]:
                    rep.fail({"check": "translation", "a": sp[i], "b": sp[j], "c": c})
    neg = [sp.index(fam.negate(a)) for a in sp]
    for i in range(n):
        for j in range(n):
            if dense[i][j] != dense[neg[i]][neg[j]]:
                rep.fail({"check": "negation", "a": sp[i], "b": sp[j]})
    rep.details["translation_checks"] = checked
    rep.wall_time = time.perf_counter() - t0
    return rep


def negation_invariance(P: Kernel, cg: CayleyGraph) -> list:
    """Pairs ``(a, b)`` of path states with ``P(a, b) != P(-a, -b)``."""
    spec = cg.spec

    def neg(path):
        return tuple(cg.index(spec.neg(cg.element(v))) for v in path)

    bad = []
    for i, r in enumerate(P.rows):
        a = P.space[i]
        na = P.space.index(neg(a))
        for j, v in r.items():
            if P.rows[na].get(P.space.index(neg(P.space[j])), 0) != v:
                bad.append((a, P.space[j]))
    return bad


def alpha_auxiliary(PA: Kernel):
    """Auxiliary class chain of the lazy family walk, at its backtrack floor."""
    from .auxiliary import build_auxiliary

    return build_auxiliary(lazy(PA))


def family_return_probability_mc(P: Kernel, fam: AlphaFamily, start: tuple, target: tuple,
                                 excursions: int, seed: int = 0, max_steps: int = 100_000) -> tuple[float, float]:
    """Monte Carlo estimate (and standard error) of the probability that the first return
    of the path-state walk to the family, started at ``start``, lands on ``target``.
    """
    from .walks import KernelSampler

    rng = np.random.default_rng(seed)
    sampler = KernelSampler(P)
    fam_idx = np.zeros(len(P), dtype=bool)
    for a in fam.labels:
        fam_idx[P.space.index(a)] = True
    s0, tgt = P.space.index(start), P.space.index(target)
    cols = [c.tolist() for c in sampler.cols]
    cums = [c.tolist() for c in sampler.cum]
    import bisect

    hits = 0
    batch = rng.random(64)
    pos = 0
    for _ in range(excursions):
        x = s0
        for _ in range(max_steps):
            if pos == len(batch):
                batch = rng.random(1 << 16)
                pos = 0
            u = batch[pos]
            pos += 1
            x = cols[x][min(bisect.bisect_right(cums[x], u), len(cols[x]) - 1)]
            if fam_idx[x]:
                break
        else:
            raise RuntimeError("excursion exceeded max_steps")
        hits += x == tgt
    phat = hits / excursions
    return phat, math.sqrt(max(phat * (1 - phat), 1e-300) / excursions)
