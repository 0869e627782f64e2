"""Capacity exhaustion sweeps and Monte Carlo return counts on boxes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .auxiliary import lifted_capacity
from .graphs import Graph, Network, bfs_distances, box_center, build_graph, distance_shells, grid_box, \
    subdivide_transient_example
from .kernels import Measure, additive_symmetrization
from .potential import CapacityProblem, capacity_nonreversible, capacity_reversible, nash_williams
from .walks import nbrw_kernel, pbrw_kernel, pair_classes, srw_kernel

WALKS = ("srw", "nbrw", "nbrw_sym", "W")


@dataclass(frozen=True)
class CapacityRow:
    experiment: str
    walk: str
    size: int
    capacity: float

    def csv(self) -> str:
        return f"{self.experiment},{self.walk},{self.size},{self.capacity:.12g}"


CAPACITY_HEADER = "experiment,walk,size,capacity"


def _box_sets(g: Graph, d: int, L: int) -> tuple[int, list[int]]:
    return box_center(d, L), sorted(g.boundary)


def box_capacity(d: int, L: int, walk: str, p: float = 0.5) -> float:
    """Capacity from the centre of the box of side ``L`` to its boundary.

    ``srw``: centre vertex to boundary vertices. ``nbrw`` (escape formula) and
    ``nbrw_sym`` (additive symmetrization): directed edges at the centre to directed
    edges touching the boundary, uniform measure. ``W``: the auxiliary class chain of
    the p-BRW, classes of edges at the centre to classes touching the boundary.
    """
    g = grid_box(d, L)
    o, bnd = _box_sets(g, d, L)
    bset = set(bnd)
    if walk == "srw":
        P, pi = srw_kernel(g)
        P = P.to_float()
        pi = Measure(pi.space, tuple(float(w) for w in pi.weights))
        return float(capacity_reversible(CapacityProblem(P, pi, [o], bnd)).capacity)
    if walk in ("nbrw", "nbrw_sym"):
        B = nbrw_kernel(g).to_float()
        pi = Measure.counting(B.space, exact=False)
        A = [a for a in B.space if o in a]
        Z = [a for a in B.space if a[0] in bset or a[1] in bset]
        if walk == "nbrw":
            return float(capacity_nonreversible(CapacityProblem(B, pi, A, Z)))
        S = additive_symmetrization(B, pi)
        return float(capacity_reversible(CapacityProblem(S, pi, A, Z)).capacity)
    if walk == "W":
        base = pbrw_kernel(g, float(p))
        classes, _ = pair_classes(base.space)
        A = [i for i, c in enumerate(classes) if o in c[0]]
        Z = [i for i, c in enumerate(classes) if c[0][0] in bset or c[0][1] in bset]
        return lifted_capacity(base, p, A, Z)
    raise ValueError(f"unknown walk {walk!r}")


def box_sweep(d: int, sizes: Iterable[int], walks: Sequence[str] = ("srw", "nbrw_sym", "W"),
              p: float = 0.5) -> list[CapacityRow]:
    return [CapacityRow(f"box{d}d", w, L, box_capacity(d, L, w, p)) for w in walks for L in sizes]


def monotone_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def relative_change(a: float, b: float) -> float:
    return abs(b - a) / abs(a)


# ---------------------------------------------------------------- subdivision example


def corner_ball(d: int, r: int) -> tuple[Graph, dict[int, int]]:
    """Vertices of the box within graph distance ``r`` of the corner, with distances."""
    box = grid_box(d, r + 1)
    dist = bfs_distances(box, 0, r)
    keep = sorted(dist)
    pos = {v: i for i, v in enumerate(keep)}
    edges = [(pos[u], pos[v]) for u, v in box.edges if u in pos and v in pos]
    g = build_graph(edges, n=len(keep), name=f"corner{d}d({r})")
    return g, {pos[v]: dist[v] for v in keep}


@dataclass(frozen=True)
class SubdivisionRow:
    radius: int
    base_capacity: float
    subdivided_capacity: float
    nash_williams_bound: float
    subdivided_vertices: int

    def csv(self) -> str:
        return (f"{self.radius},{self.base_capacity:.12g},{self.subdivided_capacity:.12g},"
                f"{self.nash_williams_bound:.12g},{self.subdivided_vertices}")


SUBDIVISION_HEADER = "radius,base_capacity,subdivided_capacity,nash_williams_bound,subdivided_vertices"


def _unit_capacity(g: Graph, A: Sequence[int], Z: Sequence[int]) -> float:
    N = Network(g, {e: 1.0 for e in g.edges})
    return float(capacity_reversible(CapacityProblem.from_network(N, A, Z)).capacity)


def subdivision_row(d: int, r: int) -> SubdivisionRow:
    """Capacity from the corner to distance ``r`` in the corner ball and in its shell subdivision."""
    h, dist = corner_ball(d, r)
    far = [v for v, k in dist.items() if k == r]
    base = _unit_capacity(h, [0], far)
    sub = subdivide_transient_example(h, 0)
    subcap = _unit_capacity(sub.graph, [0], far)
    # lump each subdivided path to one edge of conductance 1/|Pi_n| and cut along the shells
    _, shells = distance_shells(h, 0)
    weights = {}
    for n_idx, shell in enumerate(shells):
        for e in shell:
            weights[e] = Fraction(1, len(shell))
    lumped = Network(h, {e: weights.get(e, Fraction(1)) for e in h.edges})
    nw = nash_williams(lumped, 0, far, shells)
    return SubdivisionRow(r, base, subcap, float(nw.bound), sub.graph.n)


def subdivision_sweep(d: int, radii: Iterable[int]) -> list[SubdivisionRow]:
    return [subdivision_row(d, r) for r in radii]


# ---------------------------------------------------------------- Monte Carlo returns


def _neighbour_table(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    D = g.max_degree
    tab = np.full((g.n, D), -1, dtype=np.int64)
    for v in range(g.n):
        tab[v, : g.degree(v)] = g.adjacency[v]
    return tab, np.asarray(g.degrees, dtype=np.int64)


@dataclass(frozen=True)
class ReturnRow:
    walk: str
    d: int
    L: int
    replicas: int
    mean_returns: float
    stderr: float

    def csv(self) -> str:
        return f"{self.walk},{self.d},{self.L},{self.replicas},{self.mean_returns:.8g},{self.stderr:.8g}"


RETURN_HEADER = "walk,d,L,replicas,mean_returns,stderr"


def returns_before_exit(d: int, L: int, walk: str, replicas: int, rng: np.random.Generator,
                        max_steps: int = 10_000_000) -> ReturnRow:
    """Visits of the walk to the centre vertex (after time 0) before it first hits the boundary."""
    g = grid_box(d, L)
    tab, deg = _neighbour_table(g)
    o = box_center(d, L)
    bnd = np.zeros(g.n, dtype=bool)
    bnd[list(g.boundary)] = True
    cur = np.full(replicas, o, dtype=np.int64)
    prev = np.full(replicas, -1, dtype=np.int64)
    alive = np.ones(replicas, dtype=bool)
    count = np.zeros(replicas, dtype=np.int64)
    steps = 0
    while alive.any():
        idx = np.flatnonzero(alive)
        c = cur[idx]
        dg = deg[c]
        if walk == "srw":
            k = (rng.random(len(idx)) * dg).astype(np.int64)
            nxt = tab[c, k]
        elif walk == "nbrw":
            first = prev[idx] < 0
            # choose among deg - 1 non-backtracking slots, shifting past the previous vertex
            m = np.where(first, dg, dg - 1)
            k = (rng.random(len(idx)) * m).astype(np.int64)
            back_slot = np.argmax(tab[c] == prev[idx][:, None], axis=1)
            k = np.where(~first & (k >= back_slot), k + 1, k)
            nxt = tab[c, k]
        else:
            raise ValueError(f"unknown walk {walk!r}")
        prev[idx] = c
        cur[idx] = nxt
        count[idx] += nxt == o
        alive[idx] = ~bnd[nxt]
        steps += 1
        if steps > max_steps:
            raise RuntimeError("horizon exceeded")
    return ReturnRow(walk, d, L, replicas, float(count.mean()), float(count.std(ddof=1) / np.sqrt(replicas)))
