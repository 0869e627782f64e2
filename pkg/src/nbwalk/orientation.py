"""Sink-free source-free orientations and rough-map verification."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graphs import Graph, all_pairs_distances, components
from .walks import knbrw_kernel, reversal_map, transition_graph_and_quotient


class OrientationInfeasible(ValueError):
    """No sink-free source-free orientation exists; ``certificate`` explains why."""

    def __init__(self, msg: str, certificate: dict):
        super().__init__(msg)
        self.certificate = certificate


@dataclass(frozen=True)
class Orientation:
    """``choice[(u, v)]`` (with ``u <= v``) is the chosen directed version of the edge."""

    choice: Mapping[tuple[int, int], tuple[int, int]]

    def head(self, e: tuple[int, int]) -> int:
        return self.choice[(min(e), max(e))][1]

    def tail(self, e: tuple[int, int]) -> int:
        return self.choice[(min(e), max(e))][0]

    def lines(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in (self.choice[e] for e in sorted(self.choice)))


def verify_orientation(g: Graph, f: Orientation) -> bool:
    """Every edge gets one of its two directions and every vertex is both a head and a tail."""
    if set(f.choice) != set(g.edges):
        return False
    heads, tails = set(), set()
    for (u, v), (a, b) in f.choice.items():
        if (a, b) not in ((u, v), (v, u)):
            return False
        tails.add(a)
        heads.add(b)
    every = set(range(g.n))
    return heads == every and tails == every


def _infeasibility(g: Graph) -> dict | None:
    for v in range(g.n):
        if g.degree(v) < 2:
            return {"reason": "vertex of degree < 2", "vertex": v, "degree": g.degree(v)}
    for comp in components(g):
        m = sum(1 for u in comp for w in g.adjacency[u] if u <= w)
        if m < len(comp):
            return {"reason": "acyclic component", "component": comp}
    return None


def sink_free_source_free_orientation(g: Graph, strategy: str = "flow") -> Orientation:
    """Orientation in which every vertex has in- and out-degree at least one.

    ``strategy='flow'`` solves the degree-constrained problem as a transportation
    flow; ``strategy='absorption'`` grows the orientation from a cycle by absorbing
    ears, closing a path onto itself when no ear through the next vertex exists.
    """
    cert = _infeasibility(g)
    if cert is not None:
        raise OrientationInfeasible(f"no sink-free source-free orientation: {cert['reason']}", cert)
    if strategy == "flow":
        return _orient_by_flow(g)
    if strategy == "absorption":
        return _orient_by_absorption(g)
    raise ValueError(f"unknown strategy {strategy!r}")


def _orient_by_flow(g: Graph) -> Orientation:
    import networkx as nx

    # each edge node supplies one unit of in-degree to one endpoint; each vertex
    # must receive at least one and at most deg - 1 (so that it keeps an out-edge)
    net = nx.DiGraph()
    for i, (u, v) in enumerate(g.edges):
        net.add_node(("e", i), demand=-1)
        net.add_edge(("e", i), ("v", u), capacity=1)
        if v != u:
            net.add_edge(("e", i), ("v", v), capacity=1)
    for v in range(g.n):
        net.add_node(("v", v), demand=1)
        net.add_edge(("v", v), "t", capacity=g.degree(v) - 2)
    net.add_node("t", demand=len(g.edges) - g.n)
    try:
        flow = nx.min_cost_flow(net)
    except nx.NetworkXUnfeasible:
        raise OrientationInfeasible("flow problem infeasible", {"reason": "degree constraints"}) from None
    choice = {}
    for i, (u, v) in enumerate(g.edges):
        if u == v:
            choice[(u, v)] = (u, v)
        else:
            head = u if flow[("e", i)].get(("v", u), 0) == 1 else v
            choice[(u, v)] = (v, u) if head == u else (u, v)
    return Orientation(choice)


def _find_cycle(g: Graph, start: int) -> list[int]:
    """A vertex-simple cycle in the component of ``start`` (as a closed vertex list)."""
    if start in g.adjacency[start]:
        return [start, start]
    parent = {start: -1}
    depth = {start: 0}
    stack = [(start, iter(g.adjacency[start]))]
    while stack:
        u, it = stack[-1]
        for w in it:
            if w == u:
                continue
            if w not in parent:
                parent[w] = u
                depth[w] = depth[u] + 1
                stack.append((w, iter(g.adjacency[w])))
                break
            if w != parent[u] and depth[w] < depth[u]:
                cyc = [u]
                x = u
                while x != w:
                    x = parent[x]
                    cyc.append(x)
                cyc.reverse()
                return cyc + [cyc[0]]
        else:
            stack.pop()
    raise OrientationInfeasible("component without a cycle", {"reason": "acyclic component", "vertex": start})


def _orient_by_absorption(g: Graph) -> Orientation:
    choice: dict[tuple[int, int], tuple[int, int]] = {}
    absorbed: set[int] = set()

    def orient_path(p: Sequence[int]):
        for a, b in zip(p, p[1:]):
            choice[(min(a, b), max(a, b))] = (a, b)

    while len(absorbed) < g.n:
        k = min(v for v in range(g.n) if v not in absorbed)
        # find a path from the absorbed set to k through fresh vertices
        prev = {k: None}
        queue = deque([k])
        root = None
        while queue and root is None:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if w in absorbed:
                    prev.setdefault(("A", w), u)
                    root = w
                    break
                if w not in prev:
                    prev[w] = u
                    queue.append(w)
        if root is None:
            # fresh component: seed with a cycle through its smallest reachable vertex
            cyc = _find_cycle(g, k)
            orient_path(cyc)
            absorbed.update(cyc)
            continue
        head = [root]
        x = prev[("A", root)]
        while x is not None:
            head.append(x)
            x = prev[x]
        # head runs root -> ... -> k
        on_path = set(head[1:])
        first_edge = (min(head[0], head[1]), max(head[0], head[1]))
        tail = _ear_back(g, k, absorbed, on_path, first_edge if len(head) == 2 else None)
        if tail is None:
            tail = _lollipop(g, k, absorbed, on_path, head[-2])
        path = head + tail[1:]
        orient_path(path)
        absorbed.update(path)
    for u, v in g.edges:
        choice.setdefault((u, v), (u, v))
    return Orientation(choice)


def _ear_back(g: Graph, k: int, absorbed: set[int], on_path: set[int], banned: tuple | None):
    """Shortest path from ``k`` to the absorbed set through fresh vertices off the current path."""
    prev = {k: None}
    queue = deque([k])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            e = (min(u, w), max(u, w))
            if e == banned or w == u:
                continue
            if w in absorbed:
                path = [w, u]
                x = prev[u]
                while x is not None:
                    path.append(x)
                    x = prev[x]
                return path[::-1]
            if w not in prev and w not in on_path:
                prev[w] = u
                queue.append(w)
    return None


def _lollipop(g: Graph, k: int, absorbed: set[int], on_path: set[int], entry: int) -> list[int]:
    """Walk on fresh vertices from ``k`` until it can close onto its own path."""
    path = [k]
    seen = set(on_path)
    while True:
        u = path[-1]
        back = path[-2] if len(path) > 1 else entry
        closing = [w for w in g.adjacency[u] if w in seen and w != back and w != u]
        if closing:
            return path + [min(closing)]
        fresh = [w for w in g.adjacency[u] if w not in seen and w not in absorbed]
        if not fresh:
            raise OrientationInfeasible("dead end while closing a path", {"reason": "degree", "vertex": u})
        w = min(fresh)
        seen.add(w)
        path.append(w)


# ---------------------------------------------------------------- rough maps


@dataclass
class RoughReport:
    K: float
    mode: str
    valid: bool
    lower_violation: tuple | None = None
    upper_violation: tuple | None = None
    uncovered: int | None = None


@dataclass(frozen=True)
class VertexMap:
    source: Graph
    target: Graph
    f: tuple                       # image of every source vertex


class RoughMapChecker:
    """Caches all-pairs distances of both graphs; checks the two-sided bound and coverage."""

    def __init__(self, source: Graph, target: Graph, f: Sequence[int]):
        if len(f) != source.n:
            raise ValueError("map must be total on the source vertices")
        self.source, self.target = source, target
        self.f = np.asarray(f, dtype=np.int64)
        self.d1 = all_pairs_distances(source)
        self.d2 = all_pairs_distances(target)
        self.d2f = self.d2[np.ix_(self.f, self.f)]

    def check(self, K: float, mode: str = "embedding") -> RoughReport:
        d1, d2f = self.d1, self.d2f
        finite = np.isfinite(d1)
        low = np.where(finite, d1 / K - 1 - d2f, -np.inf)
        high = np.where(finite, d2f - K * (d1 + 1), -np.inf)
        tol = 1e-12
        rep = RoughReport(K, mode, True)
        if low.max() > tol:
            rep.valid = False
            rep.lower_violation = tuple(int(x) for x in np.unravel_index(low.argmax(), low.shape))
        if high.max() > tol:
            rep.valid = False
            rep.upper_violation = tuple(int(x) for x in np.unravel_index(high.argmax(), high.shape))
        if mode == "isometry":
            cover = self.d2[self.f].min(axis=0)
            bad = int((cover > K).sum())
            rep.uncovered = bad
            if bad:
                rep.valid = False
        elif mode != "embedding":
            raise ValueError("mode must be 'embedding' or 'isometry'")
        return rep

    def minimal_K(self, mode: str = "embedding", limit: int = 1 << 20) -> float:
        """Smallest integer ``K`` that passes, by doubling then bisection."""
        hi = 1
        while not self.check(hi, mode).valid:
            hi *= 2
            if hi > limit:
                return math.inf
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.check(mid, mode).valid:
                hi = mid
            else:
                lo = mid
        return hi


def rough_map_check(f: VertexMap, K: float, mode: str = "embedding") -> RoughReport:
    return RoughMapChecker(f.source, f.target, f.f).check(K, mode)


def quasi_inverse(source: Graph, target: Graph, f: Sequence[int]) -> list[int]:
    """For each target vertex, a source vertex whose image is nearest (smallest label on ties)."""
    d2 = all_pairs_distances(target)
    f = np.asarray(f)
    cols = d2[f]                                # rows: source vertices, cols: target vertices
    return [int(np.argmin(cols[:, w])) for w in range(target.n)]


def line_graph_head_map(g: Graph, orient: Orientation) -> tuple[Graph, list[int]]:
    """The line graph ``G_E`` and the map sending an edge to the head of its chosen direction."""
    from .walks import line_graphs

    lg = line_graphs(g)
    return lg.edge_graph, [orient.head(e) for e in lg.edge_labels]


def reversal_distance_bound(g: Graph, k: int, mode: str) -> float:
    """Max over distinct path states of the distance to the reversal in the transition support graph."""
    P, report = knbrw_kernel(g, k, mode)
    support = transition_graph_and_quotient(P).support
    rev = reversal_map(P.space)
    worst = 0.0
    for s in report.distinct:
        i = P.space.index(s)
        target = rev[i]
        dist = {i: 0}
        queue = deque([i])
        found = math.inf
        while queue:
            u = queue.popleft()
            if u == target:
                found = dist[u]
                break
            for w in support.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        worst = max(worst, found)
    return worst
