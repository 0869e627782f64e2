"""Universal cover of a regular graph and the walk/ray coupling on it.

Tree nodes are non-backtracking paths from the root vertex ``o``; ``psi`` sends a
node to the last vertex of its path. A simple random walk ``Y`` on the tree
projects to a simple random walk on the graph, and the ray along which ``Y``
escapes (last visits to each level) projects to a non-backtracking walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graphs import Graph, GraphError
from .kernels import Kernel, StateSpace, hitting_distribution


class CoverTree:
    """Lazily materialised cover tree; node 0 is the root."""

    def __init__(self, g: Graph, o: int, depth: int | None = None):
        degs = set(g.degrees)
        if len(degs) != 1:
            raise GraphError("the cover coupling needs a regular graph")
        d = degs.pop()
        if d < 3:
            raise GraphError("degree must be at least 3")
        self.g, self.o, self.d = g, o, d
        self.parent = [-1]
        self.vertex = [o]
        self.level = [0]
        self._children: list[list[int] | None] = [None]
        if depth is not None:
            self._grow(depth)

    def __len__(self) -> int:
        return len(self.parent)

    def children(self, u: int) -> list[int]:
        ch = self._children[u]
        if ch is None:
            back = self.vertex[self.parent[u]] if self.parent[u] >= 0 else None
            ch = []
            for w in self.g.adjacency[self.vertex[u]]:
                if w == back:
                    continue
                ch.append(len(self.parent))
                self.parent.append(u)
                self.vertex.append(w)
                self.level.append(self.level[u] + 1)
                self._children.append(None)
            self._children[u] = ch
        return ch

    def neighbours(self, u: int) -> list[int]:
        ch = self.children(u)
        return ch if self.parent[u] < 0 else [self.parent[u]] + ch

    def _grow(self, depth: int):
        frontier = [0]
        for _ in range(depth):
            frontier = [c for u in frontier for c in self.children(u)]

    def label(self, u: int) -> tuple[int, ...]:
        out = []
        while u >= 0:
            out.append(self.vertex[u])
            u = self.parent[u]
        return tuple(reversed(out))

    def psi(self, u: int) -> int:
        return self.vertex[u]


def build_cover(g: Graph, o: int, depth: int) -> CoverTree:
    """Cover tree materialised to ``depth`` levels (``1 + d sum_{i<h} (d-1)^i`` nodes)."""
    return CoverTree(g, o, depth)


def cover_size(d: int, h: int) -> int:
    return 1 + d * sum((d - 1) ** i for i in range(h))


# ---------------------------------------------------------------- exact oracles


def psi_pushforward(tree: CoverTree, n: int) -> dict[int, Fraction]:
    """Exact law of ``psi(Y_n)`` by enumerating all ``d^n`` tree walks from the root."""
    law: dict[int, Fraction] = {}
    dist = {0: Fraction(1)}
    for _ in range(n):
        nxt: dict[int, Fraction] = {}
        for u, pr in dist.items():
            nb = tree.neighbours(u)
            w = pr / len(nb)
            for v in nb:
                nxt[v] = nxt.get(v, 0) + w
        dist = nxt
    for u, pr in dist.items():
        law[tree.psi(u)] = law.get(tree.psi(u), 0) + pr
    return law


def ray_law_exact(tree: CoverTree, n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of ``(psi(W_0), ..., psi(W_n))``.

    The tree to depth ``n`` is a finite chain; from a level-``n`` node the walk steps
    to a child and never comes back with probability ``(d-1)/d * (d-2)/(d-1)``, which
    becomes an absorbing 'escape through this node' state. The absorption law is
    the law of the last node visited on level ``n``.
    """
    d = tree.d
    tree._grow(n)
    nodes = [u for u in range(len(tree)) if tree.level[u] <= n]
    esc = Fraction(d - 2, d)
    back_to_self = Fraction(d - 1, d) * Fraction(1, d - 1)
    labels = [("t", u) for u in nodes] + [("x", u) for u in nodes if tree.level[u] == n]
    space = StateSpace(labels)
    rows = []
    for u in nodes:
        if tree.level[u] < n:
            nb = tree.neighbours(u)
            rows.append({space.index(("t", v)): Fraction(1, len(nb)) for v in nb})
        else:
            r = {space.index(("x", u)): esc, space.index(("t", u)): back_to_self}
            r[space.index(("t", tree.parent[u]))] = Fraction(1, d)
            rows.append(r)
    rows += [{space.index(("x", u)): Fraction(1)} for u in nodes if tree.level[u] == n]
    P = Kernel(space, rows, exact=True)
    targets = [lab for lab in labels if lab[0] == "x"]
    h, tgt = hitting_distribution(P, targets, sources=[("t", 0)])
    law = {}
    for j, pr in h[space.index(("t", 0))].items():
        u = space[j][1]
        key = tuple(tree.vertex[x] for x in _ancestry(tree, u))
        law[key] = law.get(key, 0) + pr
    return law


def _ancestry(tree: CoverTree, u: int) -> list[int]:
    out = []
    while u >= 0:
        out.append(u)
        u = tree.parent[u]
    return out[::-1]


def nbrw_path_law(g: Graph, o: int, n: int) -> dict[tuple[int, ...], Fraction]:
    """Law of the first ``n`` steps of the NBRW from ``o`` (first step uniform over neighbours)."""
    law = {(o,): Fraction(1)}
    for step in range(n):
        nxt = {}
        for path, pr in law.items():
            opts = [w for w in g.adjacency[path[-1]] if len(path) < 2 or w != path[-2]]
            for w in opts:
                nxt[path + (w,)] = pr / len(opts)
        law = nxt
    return law


# ---------------------------------------------------------------- simulation


@dataclass
class CoupledWalks:
    nodes: np.ndarray                   # Y_0..Y_T (tree node ids)
    levels: np.ndarray
    psi: np.ndarray
    last_visit: np.ndarray              # last time at each level, for determined levels
    determined: int                     # levels 0..determined-1 have a certified last visit
    ray: list[int]                      # W_0..W_{determined-1}
    tau: list[int]
    sigma: list[int]
    rho: list[int]
    success: list[bool]                 # tau_i == sigma_i for i >= 1
    truncated: bool = False
    extra: dict = field(default_factory=dict)


def coupled_walks(tree: CoverTree, steps: int, seed: int | np.random.Generator = 0, margin: int = 40) -> CoupledWalks:
    """Run the tree walk and extract the ray and the regeneration sequence.

    A level's last visit is certified once the final level exceeds it by ``margin``
    (a return from that far happens with probability ``(d-1)^{-margin}``); later
    quantities are dropped and ``truncated`` is set.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    us = rng.random(steps)
    nodes = np.empty(steps + 1, dtype=np.int64)
    u = 0
    nodes[0] = 0
    for t in range(steps):
        nb = tree.neighbours(u)
        u = nb[int(us[t] * len(nb))]
        nodes[t + 1] = u
    level = np.asarray(tree.level)[nodes]
    psi = np.asarray(tree.vertex)[nodes]
    final = int(level[-1])
    determined = max(0, final - margin + 1)
    last = np.full(max(determined, 0), -1, dtype=np.int64)
    if determined:
        # last time at each level: scan once from the end
        seen = np.zeros(determined, dtype=bool)
        for t in range(steps, -1, -1):
            lv = level[t]
            if lv < determined and not seen[lv]:
                seen[lv] = True
                last[lv] = t
                if seen.all():
                    break
    ray = [int(nodes[t]) for t in last]
    tau, sigma, rho, succ = [], [0], [0], []
    truncated = False
    o = tree.o
    is_o = np.flatnonzero(psi == o)
    if determined:
        tau.append(int(last[0]))
        while True:
            k = np.searchsorted(is_o, tau[-1], side="right")
            if k >= len(is_o):
                truncated = True
                break
            s = int(is_o[k])
            r = int(level[s])
            if r >= determined:
                truncated = True
                break
            sigma.append(s)
            rho.append(r)
            tau.append(int(last[r]))
            succ.append(tau[-1] == s)
    else:
        truncated = True
    return CoupledWalks(nodes, level, psi, last, determined, ray, tau, sigma, rho, succ, truncated)


def success_statistics(success: list[bool]) -> tuple[float, float]:
    """Frequency of ``tau_i = sigma_i`` and its standard error."""
    n = len(success)
    if n == 0:
        raise ValueError("no regenerations")
    p = float(np.mean(success))
    return p, math.sqrt(max(p * (1 - p), 1e-300) / n)


def regeneration_samples(g: Graph, o: int, regenerations: int, seed: int = 0,
                         block_steps: int = 200_000) -> tuple[list[bool], list[int], list[tuple]]:
    """Independent replicas until ``regenerations`` successes indicators are collected.

    Returns the success indicators, the last-exit increments ``tau(level n+1) - tau(level n)``
    and the projected rays.
    """
    ss = np.random.SeedSequence(seed)
    succ, incs, rays = [], [], []
    while len(succ) < regenerations:
        child = ss.spawn(1)[0]
        tree = CoverTree(g, o)
        cw = coupled_walks(tree, block_steps, np.random.default_rng(child))
        succ.extend(cw.success)
        incs.extend(np.diff(cw.last_visit).tolist())
        rays.append(tuple(tree.psi(u) for u in cw.ray))
    return succ[:regenerations], incs, rays


@dataclass
class TailReport:
    slope: float
    intercept: float
    r2: float
    lag1: float
    lag1_sigma: float
    mean: float
    n: int


MIN_INCREMENTS = 10_000


def tau_tail(increments, s_range: tuple[int, int] = (1, 15), min_samples: int = MIN_INCREMENTS) -> TailReport:
    """Least-squares line through ``log P(X > s)`` for ``s`` in ``s_range``."""
    x = np.asarray(increments, dtype=float)
    if len(x) < min_samples:
        raise ValueError(f"only {len(x)} increments; need at least {min_samples}")
    s = np.arange(s_range[0], s_range[1] + 1)
    surv = np.array([(x > v).mean() for v in s])
    keep = surv > 0
    if keep.sum() < 3:
        raise ValueError("survival function vanishes too early for a fit")
    ls = np.log(surv[keep])
    slope, intercept = np.polyfit(s[keep], ls, 1)
    fit = slope * s[keep] + intercept
    ss_res = float(((ls - fit) ** 2).sum())
    ss_tot = float(((ls - ls.mean()) ** 2).sum())
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    xc = x - x.mean()
    lag1 = float((xc[:-1] * xc[1:]).sum() / (xc * xc).sum()) if (xc * xc).sum() > 0 else 0.0
    return TailReport(float(slope), float(intercept), r2, lag1, 1 / math.sqrt(len(x)), float(x.mean()), len(x))
