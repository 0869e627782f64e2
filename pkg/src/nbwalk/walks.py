"""Walk kernels: SRW, NBRW, p-BRW and edge/vertex k-NBRW on path states.

A path state of length ``k`` is a tuple ``(g0, ..., gk)`` of vertices with
consecutive entries adjacent. Directed edges are path states of length 1, so
the NBRW and the 1-NBRW share labels.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .graphs import Graph, GraphError, Network, graph_from_adjacency
from .kernels import Kernel, KernelError, Measure, StateSpace, network_kernel

DEFAULT_STATE_CAP = 5_000_000

PathState = tuple


class ResourceCapError(RuntimeError):
    """A configured state or trajectory cap would be exceeded."""

    def __init__(self, msg: str, estimate: int | None = None):
        super().__init__(msg)
        self.estimate = estimate


def reverse(state: Sequence[int]) -> tuple:
    return tuple(reversed(state))


def path_edges(state: Sequence[int]) -> list[tuple[int, int]]:
    return [(min(a, b), max(a, b)) for a, b in zip(state, state[1:])]


def is_path(g: Graph, state: Sequence[int]) -> bool:
    return all(g.has_edge(a, b) for a, b in zip(state, state[1:]))


def is_edge_distinct(state: Sequence[int]) -> bool:
    e = path_edges(state)
    return len(set(e)) == len(e)


def is_vertex_distinct(state: Sequence[int]) -> bool:
    return len(set(state)) == len(state)


# ---------------------------------------------------------------- first-order walks


def srw_kernel(N: Network | Graph) -> tuple[Kernel, Measure]:
    """Simple (or conductance-weighted) random walk and its reversible measure ``c_v``."""
    if isinstance(N, Graph):
        N = Network.unit(N)
    if not N.graph.is_connected():
        raise GraphError("SRW needs a connected graph")
    return network_kernel(N)


def nbrw_kernel(g: Graph) -> Kernel:
    """Non-backtracking walk on directed edges; forced backtrack at degree-1 vertices."""
    if not g.edges:
        raise GraphError("NBRW needs at least one edge")
    space = StateSpace(g.directed_edges)
    rows = []
    for x, y in space:
        d = g.degree(y)
        if d == 1:
            rows.append({space.index((y, x)): Fraction(1)})
            continue
        w = Fraction(1, d - 1)
        rows.append({space.index((y, z)): w for z in g.adjacency[y] if z != x})
    return Kernel(space, rows, exact=True)


def reversal_map(space: StateSpace) -> list[int]:
    """Index of the reversal of every state; raises if the space is not closed under reversal."""
    try:
        return [space.index(reverse(s)) for s in space]
    except KernelError:
        raise KernelError("state space is not closed under reversal") from None


def pbrw_kernel(g: Graph, p) -> Kernel:
    """``(1 - p) B + p * reversal``."""
    p = Fraction(p) if not isinstance(p, float) else p
    if not 0 < p < 1:
        raise KernelError("p must lie in (0, 1)")
    B = nbrw_kernel(g)
    rev = reversal_map(B.space)
    rows = []
    for i, r in enumerate(B.rows):
        acc = {j: (1 - p) * v for j, v in r.items()}
        acc[rev[i]] = acc.get(rev[i], 0) + p
        rows.append(acc)
    return Kernel(B.space, rows, exact=isinstance(p, Fraction))


# ---------------------------------------------------------------- path spaces


MODES = ("edge", "vertex")


def _check_mode(mode: str) -> str:
    mode = {"e": "edge", "v": "vertex"}.get(mode, mode)
    if mode not in MODES:
        raise KernelError(f"mode must be 'edge' or 'vertex', got {mode!r}")
    return mode


def all_paths(g: Graph, k: int) -> list[tuple[int, ...]]:
    """Every path (walk) with ``k`` steps, in lexicographic order."""
    paths = [(v,) for v in range(g.n)]
    for _ in range(k):
        paths = [p + (w,) for p in paths for w in g.adjacency[p[-1]]]
    return paths


def distinct_paths(g: Graph, k: int, mode: str) -> list[tuple[int, ...]]:
    """Paths crossing ``k`` distinct edges (edge mode) or visiting ``k + 1`` distinct vertices."""
    mode = _check_mode(mode)
    paths = [(v,) for v in range(g.n)]
    for _ in range(k):
        nxt = []
        for p in paths:
            used = set(path_edges(p)) if mode == "edge" else set(p)
            for w in g.adjacency[p[-1]]:
                if mode == "edge":
                    if (min(p[-1], w), max(p[-1], w)) not in used:
                        nxt.append(p + (w,))
                elif w not in used:
                    nxt.append(p + (w,))
        paths = nxt
    return paths


def admissible_next(g: Graph, state: Sequence[int], mode: str) -> list[int]:
    """``N^e(gamma)`` or ``N^v(gamma)``: neighbours of the last vertex the walk may move to."""
    last = state[-1]
    if mode == "edge":
        used = set(path_edges(state))
        return [w for w in g.adjacency[last] if (min(last, w), max(last, w)) not in used]
    seen = set(state)
    return [w for w in g.adjacency[last] if w not in seen]


def knbrw_step(g: Graph, state: Sequence[int], mode: str) -> dict[tuple, Fraction]:
    """Exact one-step law of the k-NBRW from ``state``."""
    nxt = admissible_next(g, state, mode)
    if not nxt:
        nxt = list(g.adjacency[state[-1]])
    w = Fraction(1, len(nxt))
    tail = tuple(state[1:])
    return {tail + (v,): w for v in nxt}


def state_space_estimate(g: Graph, k: int) -> int:
    d = g.max_degree
    return g.n * d * max(d - 1, 1) ** (k - 1)


@dataclass
class PathSpaceReport:
    k: int
    mode: str
    all: list[tuple] | None
    edge_distinct: list[tuple]
    vertex_distinct: list[tuple]
    reachable: list[tuple]

    @property
    def distinct(self) -> list[tuple]:
        return self.edge_distinct if self.mode == "edge" else self.vertex_distinct

    def sizes(self) -> dict[str, int]:
        return {"all": len(self.all) if self.all is not None else -1,
                "edge_distinct": len(self.edge_distinct),
                "vertex_distinct": len(self.vertex_distinct),
                "reachable": len(self.reachable)}


def forward_closure(g: Graph, starts: Iterable[tuple], mode: str, cap: int = DEFAULT_STATE_CAP) -> list[tuple]:
    seen = set(starts)
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for t in knbrw_step(g, s, mode):
            if t not in seen:
                seen.add(t)
                if len(seen) > cap:
                    raise ResourceCapError(f"reachable state space exceeds cap {cap}", len(seen))
                queue.append(t)
    return sorted(seen)


def enumerate_path_space(g: Graph, k: int, mode: str, cap: int = DEFAULT_STATE_CAP,
                         include_all: bool = True) -> PathSpaceReport:
    """All paths, the distinct-edge/vertex paths, and the reachable state space ``Omega``."""
    mode = _check_mode(mode)
    if k < 1:
        raise KernelError("k must be >= 1")
    est = state_space_estimate(g, k)
    if est > cap:
        raise ResourceCapError(f"state space estimate {est} exceeds cap {cap}", est)
    every = all_paths(g, k) if include_all else None
    pe = distinct_paths(g, k, "edge")
    pv = distinct_paths(g, k, "vertex")
    omega = forward_closure(g, pe if mode == "edge" else pv, mode, cap)
    return PathSpaceReport(k, mode, every, pe, pv, omega)


def knbrw_kernel(g: Graph, k: int, mode: str, cap: int = DEFAULT_STATE_CAP) -> tuple[Kernel, PathSpaceReport]:
    """Exact k-NBRW kernel over the reachable state space (sorted labels)."""
    mode = _check_mode(mode)
    report = enumerate_path_space(g, k, mode, cap, include_all=False)
    space = StateSpace(report.reachable)
    kernel = Kernel.from_function(space, lambda s: knbrw_step(g, s, mode), exact=True)
    return kernel, report


# ---------------------------------------------------------------- stuck states


@dataclass
class StuckReport:
    k: int
    mode: str
    never_stuck: bool
    stuck_states: list[tuple]
    degree_criterion: bool          # min degree >= k+1 (vertex) / ceil(2k/3)+1 (edge)
    parity_criterion: bool          # edge mode: every vertex even or of large degree
    entered_stuck: list[tuple]      # (non-stuck state, stuck successor) pairs
    sufficiency_ok: bool


def stuck_check(g: Graph, k: int, mode: str, cap: int = DEFAULT_STATE_CAP) -> StuckReport:
    """Direct check for stuck states in ``Omega`` plus the simple degree criteria.

    The degree criterion must imply ``never_stuck``. The parity criterion only
    promises that a walk started from a non-stuck state never gets stuck, so it
    is checked as: no non-stuck state has a stuck successor.
    """
    mode = _check_mode(mode)
    report = enumerate_path_space(g, k, mode, cap, include_all=False)
    stuck = [s for s in report.reachable if not admissible_next(g, s, mode)]
    stuck_set = set(stuck)
    bound = k + 1 if mode == "vertex" else math.ceil(2 * k / 3) + 1
    deg_ok = g.min_degree >= bound
    parity = mode == "edge" and all(d % 2 == 0 or d >= bound for d in g.degrees)
    entered = []
    if parity:
        for s in report.reachable:
            if s in stuck_set:
                continue
            for t in knbrw_step(g, s, mode):
                if t in stuck_set:
                    entered.append((s, t))
    ok = (not deg_ok or not stuck) and (not parity or not entered)
    return StuckReport(k, mode, not stuck, stuck, deg_ok, parity, entered, ok)


# ---------------------------------------------------------------- reachability


def _bfs_steps(kernel: Kernel, src: int, cap: int | None = None) -> dict[int, int]:
    """Minimal ``i >= 1`` with ``P^i(src, j) > 0`` for every reachable ``j``."""
    dist: dict[int, int] = {}
    frontier = list(kernel.rows[src])
    for j in frontier:
        dist[j] = 1
    step = 1
    while frontier and (cap is None or step < cap):
        step += 1
        nxt = []
        for i in frontier:
            for j in kernel.rows[i]:
                if j not in dist:
                    dist[j] = step
                    nxt.append(j)
        frontier = nxt
    return dist


@dataclass
class ReversalAccess:
    per_state: dict[tuple, float]
    worst: float
    worst_state: tuple | None


def reversal_access(kernel: Kernel, cap: int = 1000) -> ReversalAccess:
    """For every state ``a``, the least ``i >= 1`` with ``P^i(a, a^r) > 0`` (``inf`` if none within ``cap``)."""
    rev = reversal_map(kernel.space)
    per = {}
    worst, worst_state = 0.0, None
    for i, lab in enumerate(kernel.space):
        d = _bfs_steps(kernel, i, cap).get(rev[i], math.inf)
        per[lab] = d
        if d > worst or worst_state is None:
            worst, worst_state = d, lab
    return ReversalAccess(per, worst, worst_state)


def condition_2k_radius(g: Graph, k: int, mode: str, cap: int = DEFAULT_STATE_CAP) -> tuple[float, tuple | None]:
    """Max over vertex-sharing pairs of distinct paths of the least number of steps between them."""
    mode = _check_mode(mode)
    kernel, report = knbrw_kernel(g, k, mode, cap)
    states = report.distinct
    by_vertex: dict[int, list[int]] = {}
    idx = [kernel.space.index(s) for s in states]
    for s, i in zip(states, idx):
        for v in set(s):
            by_vertex.setdefault(v, []).append(i)
    worst, witness = 0.0, None
    for s, i in zip(states, idx):
        dist = _bfs_steps(kernel, i)
        dist[i] = 0
        partners = {j for v in set(s) for j in by_vertex[v]}
        for j in partners:
            d = dist.get(j, math.inf)
            if d > worst:
                worst, witness = d, (s, kernel.space[j])
    return worst, witness


# ---------------------------------------------------------------- derived graphs


@dataclass
class LineGraphs:
    edge_graph: Graph                 # G_E, vertices labelled by G.edges
    edge_labels: tuple
    oriented_graph: Graph             # G_vecE, vertices labelled by G.directed_edges
    oriented_labels: tuple


def line_graphs(g: Graph) -> LineGraphs:
    edges = g.edges
    eidx = {e: i for i, e in enumerate(edges)}
    adj: list[set[int]] = [set() for _ in edges]
    for v in range(g.n):
        inc = [eidx[(min(v, w), max(v, w))] for w in g.adjacency[v]]
        for a, b in itertools.combinations(inc, 2):
            adj[a].add(b)
            adj[b].add(a)
    G_E = graph_from_adjacency(adj, name=f"L({g.name})")

    darts = g.directed_edges
    didx = {d: i for i, d in enumerate(darts)}
    oadj: list[set[int]] = [set() for _ in darts]

    def linked(e, f):
        return e[1] == f[0] and (g.degree(e[1]) == 1 or e[0] != f[1])

    for e in darts:
        for w in g.adjacency[e[1]]:
            f = (e[1], w)
            if e != f and linked(e, f):
                oadj[didx[e]].add(didx[f])
                oadj[didx[f]].add(didx[e])
    G_dE = graph_from_adjacency(oadj, name=f"L->({g.name})")
    return LineGraphs(G_E, edges, G_dE, darts)


@dataclass
class TransitionGraphs:
    support: Graph               # support graph of P + P^T (labels: kernel.space)
    quotient: Graph              # classes {a, a^r}
    classes: tuple               # class representatives (sorted pair tuples)
    class_of: tuple              # state index -> class index


def pair_classes(space: StateSpace) -> tuple[tuple[tuple, ...], list[int]]:
    """Classes ``{a, a^r}`` as sorted tuples, in order of first appearance; state -> class index."""
    rev = reversal_map(space)
    classes: list[tuple] = []
    cls = [-1] * len(space)
    for i, lab in enumerate(space):
        if cls[i] >= 0:
            continue
        c = len(classes)
        members = tuple(sorted({lab, space[rev[i]]}))
        classes.append(members)
        cls[i] = c
        cls[rev[i]] = c
    return tuple(classes), cls


def transition_graph_and_quotient(kernel: Kernel) -> TransitionGraphs:
    n = len(kernel)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i, r in enumerate(kernel.rows):
        for j in r:
            adj[i].add(j)
            adj[j].add(i)
    support = graph_from_adjacency(adj)
    classes, cls = pair_classes(kernel.space)
    qadj: list[set[int]] = [set() for _ in classes]
    for i, r in enumerate(kernel.rows):
        for j in r:
            a, b = cls[i], cls[j]
            if a != b:
                qadj[a].add(b)
                qadj[b].add(a)
    return TransitionGraphs(support, graph_from_adjacency(qadj), classes, tuple(cls))


# ---------------------------------------------------------------- sampling


class KernelSampler:
    """Float cumulative tables for fast sampling from an exact or float kernel."""

    def __init__(self, kernel: Kernel):
        self.kernel = kernel
        self.cols = []
        self.cum = []
        for r in kernel.rows:
            cols = np.fromiter(r.keys(), dtype=np.int64, count=len(r))
            probs = np.fromiter((float(v) for v in r.values()), dtype=float, count=len(r))
            self.cols.append(cols)
            c = np.cumsum(probs)
            c[-1] = 1.0
            self.cum.append(c)

    def step(self, i: int, u: float) -> int:
        return int(self.cols[i][np.searchsorted(self.cum[i], u, side="right")])

    def run(self, start: int, steps: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(steps + 1, dtype=np.int64)
        out[0] = start
        us = rng.random(steps)
        cur = start
        for t in range(steps):
            cur = self.step(cur, us[t])
            out[t + 1] = cur
        return out


def start_from_vertex(g: Graph, k: int, mode: str, v: int, rng: np.random.Generator) -> tuple:
    """Sample an initial path state: one SRW step from ``v`` then k-NBRW extensions."""
    mode = _check_mode(mode)
    state: tuple = (v, int(rng.choice(g.adjacency[v])))
    while len(state) < k + 1:
        nxt = admissible_next(g, state, mode) or list(g.adjacency[state[-1]])
        state = state + (int(rng.choice(nxt)),)
    return state
