"""Graphs, networks, generators and structural condition checks.

Vertex numbering of every generator is fixed:

* ``complete(n)``: vertices ``0..n-1``.
* ``cycle(n)``: ``i ~ i+1 (mod n)``.
* ``path(n)``: ``i ~ i+1`` for ``i < n-1``.
* ``grid_box(d, L)`` / ``torus(d, L)``: the point ``(x_0, ..., x_{d-1})`` has
  index ``ravel_multi_index(x, (L,)*d)`` (row-major, last coordinate fastest).
* ``regular_tree(d, h)``: breadth-first, root is ``0``, children of a node are
  numbered in the order they are created.
* ``bowtie()``: two triangles ``{0,1,2}`` and ``{2,3,4}`` sharing the centre ``2``.

A loop ``(v, v)`` is stored once in the adjacency of ``v`` and adds one to its
degree.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph input (duplicate edge, empty edge list, bad ids)."""


@dataclass(frozen=True)
class Graph:
    adjacency: tuple[tuple[int, ...], ...]
    boundary: frozenset[int] = frozenset()
    name: str = ""

    def __post_init__(self):
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"adjacency of {v} is not a sorted duplicate-free list")
            for w in nbrs:
                if not 0 <= w < len(self.adjacency):
                    raise GraphError(f"neighbor {w} of {v} out of range")
                if v not in self.adjacency[w]:
                    raise GraphError(f"asymmetric adjacency between {v} and {w}")

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u in range(self.n) for v in self.adjacency[u] if u <= v)

    @cached_property
    def directed_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u in range(self.n) for v in self.adjacency[u])

    @cached_property
    def _adjsets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    @property
    def min_degree(self) -> int:
        return min(self.degrees)

    def has_loops(self) -> bool:
        return any(v in self._adjsets[v] for v in range(self.n))

    def is_connected(self) -> bool:
        return len(components(self)) == 1

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


def graph_from_adjacency(adj: Sequence[Iterable[int]], boundary=(), name="") -> Graph:
    return Graph(tuple(tuple(sorted(set(a))) for a in adj), frozenset(boundary), name)


def build_graph(edge_list: Sequence[tuple[int, int]], n: int | None = None, name: str = "",
                boundary: Iterable[int] = ()) -> Graph:
    """Build a simple graph (loops allowed) from 0-based vertex pairs.

    ``n`` defaults to ``1 + max id``; pass it to add isolated vertices.
    """
    if not edge_list:
        raise GraphError("empty edge list")
    seen: set[tuple[int, int]] = set()
    size = 1 + max(max(u, v) for u, v in edge_list)
    if n is not None:
        if n < size:
            raise GraphError(f"vertex count {n} smaller than max id + 1 = {size}")
        size = n
    adj: list[set[int]] = [set() for _ in range(size)]
    for u, v in edge_list:
        if u < 0 or v < 0:
            raise GraphError(f"negative vertex id in edge {(u, v)}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        adj[u].add(v)
        adj[v].add(u)
    return graph_from_adjacency(adj, boundary, name)


# ---------------------------------------------------------------- networks


@dataclass(frozen=True)
class Network:
    """A graph with positive symmetric conductances; keys are ``(u, v)`` with ``u <= v``.

    ``labels`` optionally names the vertices (directed edges, pair classes, ...).
    """

    graph: Graph
    conductance: Mapping[tuple[int, int], Fraction | float]
    labels: tuple | None = None

    def __post_init__(self):
        if set(self.conductance) != set(self.graph.edges):
            raise GraphError("conductances must be given for exactly the edges of the graph")
        for e, c in self.conductance.items():
            if not c > 0:
                raise GraphError(f"non-positive conductance {c} on edge {e}")

    def c(self, u: int, v: int):
        return self.conductance.get((min(u, v), max(u, v)), 0)

    @cached_property
    def vertex_weights(self) -> tuple:
        w = [0] * self.graph.n
        for (u, v), c in self.conductance.items():
            w[u] += c
            if u != v:
                w[v] += c
        return tuple(w)

    def vertex_weight(self, v: int):
        return self.vertex_weights[v]

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.conductance.values())

    def label(self, v: int):
        return v if self.labels is None else self.labels[v]

    @classmethod
    def unit(cls, graph: Graph) -> "Network":
        return cls(graph, {e: Fraction(1) for e in graph.edges})

    @classmethod
    def from_weights(cls, n: int, weights: Mapping[tuple[int, int], Fraction | float],
                     labels: tuple | None = None) -> "Network":
        """Network from an (unordered) weight map; zero weights are dropped, duplicates summed."""
        cond: dict[tuple[int, int], Fraction | float] = {}
        for (u, v), c in weights.items():
            if c == 0:
                continue
            key = (min(u, v), max(u, v))
            cond[key] = cond.get(key, 0) + c
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in cond:
            adj[u].add(v)
            adj[v].add(u)
        return cls(graph_from_adjacency(adj), cond, labels)

    def energy(self, f: Sequence) -> Fraction | float:
        """Sum over undirected edges of ``c_e (f(u) - f(v))^2``."""
        return sum((c * (f[u] - f[v]) ** 2 for (u, v), c in self.conductance.items()), start=0 * f[0])


# ---------------------------------------------------------------- generators


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError("complete graph needs n >= 2")
    return build_graph(list(itertools.combinations(range(n), 2)), name=f"K{n}")


def cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return build_graph([(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path(n: int) -> Graph:
    """Path on ``n`` vertices (``n - 1`` edges)."""
    if n < 2:
        raise GraphError("path needs n >= 2")
    return build_graph([(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def star(leaves: int) -> Graph:
    return build_graph([(0, i) for i in range(1, leaves + 1)], name=f"K1,{leaves}")


def bowtie() -> Graph:
    return build_graph([(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)], name="bowtie")


def cycle_with_chords(n: int = 6) -> Graph:
    """``C_n`` (n even) plus the long diagonals ``i ~ i + n/2``."""
    if n % 2 or n < 4:
        raise GraphError("cycle_with_chords needs even n >= 4")
    edges = [(i, (i + 1) % n) for i in range(n)] + [(i, i + n // 2) for i in range(n // 2)]
    return build_graph(edges, name=f"C{n}+chords")


def dumbbell(bridge: int) -> Graph:
    """Two triangles joined by a path with ``bridge`` edges (a long 2-path)."""
    if bridge < 1:
        raise GraphError("bridge length must be >= 1")
    edges = [(0, 1), (1, 2), (0, 2)]
    prev = 2
    for i in range(bridge - 1):
        edges.append((prev, 3 + i))
        prev = 3 + i
    a = 3 + bridge - 1
    edges += [(prev, a), (a, a + 1), (a + 1, a + 2), (a, a + 2)]
    return build_graph(edges, name=f"dumbbell{bridge}")


def _lattice(d: int, L: int, wrap: bool) -> Graph:
    shape = (L,) * d
    n = L**d
    edges = []
    boundary = set()
    for idx in range(n):
        x = np.unravel_index(idx, shape)
        if not wrap and any(c in (0, L - 1) for c in x):
            boundary.add(idx)
        for axis in range(d):
            y = list(x)
            if x[axis] + 1 < L:
                y[axis] += 1
            elif wrap:
                y[axis] = 0
            else:
                continue
            edges.append((idx, int(np.ravel_multi_index(y, shape))))
    kind = "torus" if wrap else "box"
    return build_graph(edges, n=n, name=f"{kind}{d}d{L}", boundary=boundary)


def grid_box(d: int, L: int) -> Graph:
    """Box ``{0..L-1}^d`` of ``Z^d``; boundary = points with a coordinate in ``{0, L-1}``."""
    if d < 1 or L < 2:
        raise GraphError("grid box needs d >= 1 and L >= 2")
    return _lattice(d, L, wrap=False)


def torus(d: int, L: int) -> Graph:
    if d < 1 or L < 3:
        raise GraphError("torus needs d >= 1 and L >= 3 (L = 2 would create multi-edges)")
    return _lattice(d, L, wrap=True)


def box_center(d: int, L: int) -> int:
    return int(np.ravel_multi_index((L // 2,) * d, (L,) * d))


def regular_tree(d: int, h: int) -> Graph:
    """Ball of radius ``h`` in the ``d``-regular tree; leaves form the boundary."""
    if d < 3:
        raise GraphError("d-regular tree requires d >= 3")
    if h < 1:
        raise GraphError("depth must be >= 1")
    edges = []
    frontier = [0]
    nxt = 1
    for depth in range(h):
        new = []
        for v in frontier:
            for _ in range(d if depth == 0 else d - 1):
                edges.append((v, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return build_graph(edges, name=f"T{d}h{h}", boundary=frontier)


def random_even_graph(n: int, rng: np.random.Generator, cycles: int = 3, max_tries: int = 200) -> Graph:
    """Connected simple graph with all degrees even: a union of edge-disjoint random cycles."""
    for _ in range(max_tries):
        edges: set[tuple[int, int]] = set()
        order = rng.permutation(n)
        for i in range(n):
            u, v = int(order[i]), int(order[(i + 1) % n])
            edges.add((min(u, v), max(u, v)))
        for _ in range(cycles - 1):
            length = int(rng.integers(3, n + 1))
            verts = [int(x) for x in rng.choice(n, size=length, replace=False)]
            cyc = [(min(verts[i], verts[(i + 1) % length]), max(verts[i], verts[(i + 1) % length]))
                   for i in range(length)]
            if any(e in edges for e in cyc):
                continue
            edges.update(cyc)
        g = build_graph(sorted(edges), n=n, name=f"even{n}")
        if g.is_connected():
            return g
    raise GraphError("could not generate a connected even graph")


def random_min_degree_two(n: int, rng: np.random.Generator, extra: float = 0.5) -> Graph:
    """Connected graph with minimum degree >= 2: random spanning tree, then patch leaves."""
    edges: set[tuple[int, int]] = set()
    order = [int(x) for x in rng.permutation(n)]
    for i in range(1, n):
        u, v = order[i], order[int(rng.integers(0, i))]
        edges.add((min(u, v), max(u, v)))
    for _ in range(int(extra * n)):
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        edges.add((min(u, v), max(u, v)))
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    for v in range(n):
        while deg[v] < 2:
            w = int(rng.integers(0, n))
            e = (min(v, w), max(v, w))
            if w == v or e in edges:
                continue
            edges.add(e)
            deg[v] += 1
            deg[w] += 1
    return build_graph(sorted(edges), n=n, name=f"mindeg2_{n}")


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return build_graph(edges, n=n, name=f"tree{n}")


def generate(family: str, **params) -> Graph:
    """Dispatch on a family name: complete, cycle, path, box, torus, tree, bowtie, file, ..."""
    family = family.lower()
    if family in ("complete", "k"):
        return complete(params["n"])
    if family in ("cycle", "c"):
        return cycle(params["n"])
    if family == "path":
        return path(params["n"])
    if family == "star":
        return star(params["n"])
    if family in ("box", "grid"):
        return grid_box(params.get("d", 2), params["L"])
    if family == "torus":
        return torus(params.get("d", 2), params["L"])
    if family == "tree":
        return regular_tree(params["d"], params["h"])
    if family == "bowtie":
        return bowtie()
    if family == "chords":
        return cycle_with_chords(params.get("n", 6))
    if family == "dumbbell":
        return dumbbell(params["L"])
    if family == "file":
        return read_graph_file(params["path"])[0]
    raise GraphError(f"unknown graph family {family!r}")


def small_suite() -> list[Graph]:
    """Graphs with at most 9 vertices used for exhaustive identity checks."""
    return [complete(3), complete(4), complete(5), cycle(4), cycle(5), cycle(6), path(3), path(4),
            star(3), bowtie(), cycle_with_chords(6), cycle_with_chords(8), dumbbell(2), torus(2, 3),
            grid_box(2, 3)]


# ---------------------------------------------------------------- file format


def _parse_conductance(tok: str) -> Fraction:
    return Fraction(tok)


def read_graph_file(path: str | Path) -> tuple[Graph, Network]:
    """Parse ``u v [c]`` lines; ``#`` starts a comment. Returns the graph and its network."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_graph_text(text)


def parse_graph_text(text: str) -> tuple[Graph, Network]:
    edges = []
    cond: dict[tuple[int, int], Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v [conductance]', got {raw!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
            c = _parse_conductance(toks[2]) if len(toks) == 3 else Fraction(1)
        except (ValueError, ZeroDivisionError) as exc:
            raise GraphError(f"line {lineno}: {exc}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative vertex id")
        key = (min(u, v), max(u, v))
        if key in cond:
            raise GraphError(f"line {lineno}: duplicate edge {key}")
        if c <= 0:
            raise GraphError(f"line {lineno}: conductance must be positive")
        cond[key] = c
        edges.append((u, v))
    if not edges:
        raise GraphError("graph file contains no edges")
    g = build_graph(edges)
    return g, Network(g, cond)


def write_graph_text(network: Network | Graph) -> str:
    if isinstance(network, Graph):
        return "".join(f"{u} {v}\n" for u, v in network.edges)
    return "".join(f"{u} {v} {c}\n" for (u, v), c in sorted(network.conductance.items()))


# ---------------------------------------------------------------- metric queries


def bfs_distances(g: Graph, source: int, radius: int | None = None) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if radius is not None and dist[u] >= radius:
            continue
        for w in g.adjacency[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def ball_and_distance(g: Graph, v: int, r: int) -> tuple[frozenset[int], dict[int, int]]:
    if not 0 <= v < g.n:
        raise GraphError(f"vertex {v} not in graph")
    dist = bfs_distances(g, v, r)
    return frozenset(dist), dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Dense hop-distance matrix; ``inf`` between components."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    rows, cols = [], []
    for u, v in g.directed_edges:
        if u != v:
            rows.append(u)
            cols.append(v)
    m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    return shortest_path(m, unweighted=True, directed=False)


def components(g: Graph) -> list[list[int]]:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = list(bfs_distances(g, s))
        for v in comp:
            seen[v] = True
        out.append(sorted(comp))
    return out


def girth(g: Graph) -> float:
    """Length of a shortest cycle (a loop counts as length 1); ``inf`` for forests."""
    if g.has_loops():
        return 1
    best = math.inf
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in g.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


# ---------------------------------------------------------------- structural conditions


@dataclass
class ConditionReport:
    condition: str
    holds: bool
    value: float | None = None
    witness: object = None
    details: dict = field(default_factory=dict)


def two_paths(g: Graph) -> list[tuple[int, ...]]:
    """Maximal paths whose internal vertices all have degree exactly 2.

    Pure cycles of degree-2 vertices are returned closed (first vertex repeated).
    Single edges between vertices of degree != 2 count as 2-paths of length 1.
    """
    out = []
    used_edges: set[tuple[int, int]] = set()
    deg = g.degrees

    def key(a, b):
        return (min(a, b), max(a, b))

    for s in range(g.n):
        if deg[s] == 2:
            continue
        for w in g.adjacency[s]:
            if key(s, w) in used_edges:
                continue
            chain = [s, w]
            used_edges.add(key(s, w))
            prev, cur = s, w
            while deg[cur] == 2 and cur != s:
                nxt = [x for x in g.adjacency[cur] if x != prev]
                nxt = nxt[0] if nxt else prev
                used_edges.add(key(cur, nxt))
                chain.append(nxt)
                prev, cur = cur, nxt
            out.append(tuple(chain))
    # components that are cycles of degree-2 vertices
    for s in range(g.n):
        if deg[s] == 2 and any(key(s, w) not in used_edges for w in g.adjacency[s]):
            chain = [s]
            prev, cur = None, s
            while True:
                nxt = [x for x in g.adjacency[cur] if x != prev and key(cur, x) not in used_edges]
                if not nxt:
                    break
                used_edges.add(key(cur, nxt[0]))
                prev, cur = cur, nxt[0]
                chain.append(cur)
                if cur == s:
                    break
            out.append(tuple(chain))
    return out


def max_two_path_length(g: Graph) -> tuple[int, tuple[int, ...] | None]:
    paths = two_paths(g)
    if not paths:
        return 0, None
    best = max(paths, key=len)
    return len(best) - 1, best


def _interior_centers(g: Graph, radius: int) -> list[int]:
    """Centres whose radius-``radius`` ball avoids the truncation boundary."""
    if not g.boundary:
        return list(range(g.n))
    out = []
    for v in range(g.n):
        ball = bfs_distances(g, v, radius)
        if not any(u in g.boundary for u in ball):
            out.append(v)
    return out


def _induced_has_cycle(g: Graph, verts: frozenset[int]) -> bool:
    m = sum(1 for u in verts for w in g.adjacency[u] if w in verts and u <= w)
    sub_comps = 0
    seen: set[int] = set()
    for s in verts:
        if s in seen:
            continue
        sub_comps += 1
        stack = [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
    return m > len(verts) - sub_comps


def longest_simple_cycle(g: Graph, verts: frozenset[int], mode: str, target: int | None = None) -> int:
    """Longest vertex-simple (``mode='v'``) or edge-simple (``mode='e'``) cycle inside ``verts``.

    Stops early once a cycle of length ``>= target`` is found. Exhaustive DFS, meant for small balls.
    """
    best = 0
    for s in sorted(verts):
        if s in g.adjacency[s]:
            best = max(best, 1)
        stack: list[tuple[int, tuple[int, ...], frozenset]] = [(s, (s,), frozenset())]
        while stack:
            u, walk, used = stack.pop()
            for w in g.adjacency[u]:
                if w not in verts or w == u:
                    continue
                e = (min(u, w), max(u, w))
                if mode == "v":
                    if w == s:
                        if len(walk) >= 3:
                            best = max(best, len(walk))
                    elif w > s and w not in walk:
                        stack.append((w, walk + (w,), used))
                else:
                    if e in used:
                        continue
                    if w == s:
                        best = max(best, len(used) + 1)
                    else:
                        stack.append((w, walk + (w,), used | {e}))
            if target is not None and best >= target:
                return best
    return best


def check_structural_condition(g: Graph, which: str, *, L: int | None = None, R: int | None = None,
                               k: int | None = None) -> ConditionReport:
    """Evaluate one of the conditions ``1, 2, 2ke, 2kv, 3ke, 3kv, 4ke, 4kv`` on a finite graph."""
    which = which.lower().replace("_", "").replace("^", "").replace("(", "").replace(")", "")
    if which == "1":
        length, witness = max_two_path_length(g)
        if L is None:
            return ConditionReport("1", True, length, witness)
        return ConditionReport("1", length <= L, length, None if length <= L else witness)
    if which == "2":
        if R is None:
            raise GraphError("condition (2) needs R")
        for v in _interior_centers(g, R):
            ball, _ = ball_and_distance(g, v, R)
            if not _induced_has_cycle(g, ball):
                return ConditionReport("2", False, R, v)
        return ConditionReport("2", True, R)
    if which in ("4ke", "4kv"):
        if R is None or k is None:
            raise GraphError("condition (4_k) needs R and k")
        mode = which[-1]
        need = k if mode == "e" else k + 1
        for v in _interior_centers(g, R):
            ball, _ = ball_and_distance(g, v, R)
            if longest_simple_cycle(g, ball, mode, target=need) < need:
                return ConditionReport(which, False, R, v)
        return ConditionReport(which, True, R)
    if which in ("3ke", "3kv"):
        from .walks import stuck_check

        rep = stuck_check(g, k, "edge" if which.endswith("e") else "vertex")
        return ConditionReport(which, rep.never_stuck, None, rep.stuck_states[:5])
    if which in ("2ke", "2kv"):
        from .walks import condition_2k_radius

        val, witness = condition_2k_radius(g, k, "edge" if which.endswith("e") else "vertex")
        holds = val <= R if R is not None else math.isfinite(val)
        return ConditionReport(which, holds, val, None if holds else witness)
    raise GraphError(f"unknown condition {which!r}")


def condition_two_radius(g: Graph, r_max: int | None = None) -> float:
    """Smallest R such that every (interior) ball of radius R contains a cycle; inf if none."""
    r_max = r_max if r_max is not None else g.n
    for r in range(0, r_max + 1):
        if check_structural_condition(g, "2", R=r).holds:
            return r
    return math.inf


# ---------------------------------------------------------------- subdivision example


@dataclass
class SubdividedGraph:
    graph: Graph
    shell_sizes: list[int]
    original: list[int]           # index of each vertex of H inside the output graph
    shell_of_edge: dict[tuple[int, int], int]


def distance_shells(h: Graph, o: int) -> tuple[dict[int, int], list[list[tuple[int, int]]]]:
    """Distances from ``o`` and the cut sets ``Pi_n`` (edges from distance n-1 to n)."""
    dist = bfs_distances(h, o)
    depth = max(dist.values())
    shells: list[list[tuple[int, int]]] = [[] for _ in range(depth)]
    for u, v in h.edges:
        if u in dist and v in dist and abs(dist[u] - dist[v]) == 1:
            n = max(dist[u], dist[v])
            shells[n - 1].append((u, v))
    return dist, shells


def subdivide_transient_example(h: Graph, o: int) -> SubdividedGraph:
    """Replace every edge of the n-th distance shell cut by a path of length ``|Pi_n|``."""
    _, shells = distance_shells(h, o)
    sizes = [len(s) for s in shells]
    edges = []
    nxt = h.n
    shell_of = {}
    for n_idx, shell in enumerate(shells):
        m = sizes[n_idx]
        for u, v in shell:
            shell_of[(u, v)] = n_idx + 1
            prev = u
            for _ in range(m - 1):
                edges.append((prev, nxt))
                prev = nxt
                nxt += 1
            edges.append((prev, v))
    shelled = set(shell_of)
    edges.extend(e for e in h.edges if e not in shelled)
    g = build_graph(edges, n=nxt, name=f"subdiv({h.name})", boundary=h.boundary)
    return SubdividedGraph(g, sizes, list(range(h.n)), shell_of)
