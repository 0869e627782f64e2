"""Multiplicities, the product-form stationary measure of the edge k-NBRW and its symmetries."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .graphs import Graph
from .kernels import Kernel, KernelError, Measure, StateSpace, check_stationary_reversible, lazy
from .walks import (ResourceCapError, is_edge_distinct, knbrw_kernel, nbrw_kernel, path_edges,
                    reversal_map, reverse, stuck_check)

TRAJECTORY_CAP = 10_000_000


class DegenerateWeightError(KernelError):
    """A factor ``deg(g_i) - m_i`` of the product weight vanishes."""


@dataclass(frozen=True)
class MultiplicityProfile:
    path: tuple
    k: int
    m: tuple                       # m[i] for i = 0..s
    multisets: dict                # v -> sorted tuple of m_i over interior i with path[i] == v

    def A(self, v: int) -> tuple:
        return self.multisets.get(v, ())


def multiplicity_profile(path: Sequence[int], k: int) -> MultiplicityProfile:
    """``m_i`` counts the ``j`` in ``(i - k, i]`` with ``path[j] == path[i]``; multisets use interior ``i`` only."""
    path = tuple(path)
    s = len(path) - 1
    if s < k:
        raise KernelError(f"path length {s} is shorter than the window {k}")
    m = tuple(sum(1 for j in range(max(0, i - k + 1), i + 1) if path[j] == path[i]) for i in range(s + 1))
    buckets: dict[int, list[int]] = {}
    for i in range(1, s):
        buckets.setdefault(path[i], []).append(m[i])
    return MultiplicityProfile(path, k, m, {v: tuple(sorted(ms)) for v, ms in buckets.items()})


def pi_ke(g: Graph, state: Sequence[int]) -> Fraction:
    """``prod_{i=1}^{k-1} 1 / (deg(g_i) - m_i)`` for a path state with ``k`` distinct edges."""
    k = len(state) - 1
    if not is_edge_distinct(state):
        raise KernelError(f"{tuple(state)} does not cross distinct edges")
    prof = multiplicity_profile(state, k)
    w = Fraction(1)
    for i in range(1, k):
        d = g.degree(state[i]) - prof.m[i]
        if d <= 0:
            raise DegenerateWeightError(f"zero factor at position {i} of {tuple(state)}")
        w /= d
    return w


def pi_ke_measure(g: Graph, space: StateSpace) -> Measure:
    return Measure.from_function(space, lambda s: pi_ke(g, s))


# ---------------------------------------------------------------- reports


@dataclass
class IdentityReport:
    identity: str
    graph: str
    k: int | None
    n: int | None
    status: str = "pass"
    counterexamples: list = field(default_factory=list)
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail(self, witness, limit: int = 20):
        self.status = "fail"
        if len(self.counterexamples) < limit:
            self.counterexamples.append(witness)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counterexamples"] = [_jsonable(c) for c in self.counterexamples]
        d["details"] = _jsonable(self.details)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# ---------------------------------------------------------------- multiset reversal


def edge_window_paths(g: Graph, k: int, s: int) -> Iterator[tuple]:
    """Paths of length ``s`` whose every window of ``k`` consecutive steps crosses distinct edges."""
    def extend(p: tuple):
        if len(p) == s + 1:
            yield p
            return
        window = path_edges(p[max(0, len(p) - k):])
        used = set(window)
        last = p[-1]
        for w in g.adjacency[last]:
            if (min(last, w), max(last, w)) not in used:
                yield from extend(p + (w,))

    for v in range(g.n):
        yield from extend((v,))


def verify_multiset_reversal(g: Graph, k: int, s: int) -> IdentityReport:
    """``A(v, k, path) == A(v, k, reversed path)`` for every window-distinct path of length ``s``.

    Also replays the two inductions behind the statement: along ``s`` from ``k`` up to
    ``s`` for fixed ``k``, and along ``k`` at ``s == k``. Every prefix obtained by
    dropping the last vertex is checked and recorded per level.
    """
    if s < k:
        raise KernelError("need s >= k")
    t0 = time.perf_counter()
    rep = IdentityReport("multiset_reversal", g.name, k, s)
    levels: dict[str, int] = {}

    def check(path, kk, tag):
        levels[tag] = levels.get(tag, 0) + 1
        rev = reverse(path)
        a, b = multiplicity_profile(path, kk), multiplicity_profile(rev, kk)
        for v in set(path):
            if a.A(v) != b.A(v):
                rep.fail({"path": path, "k": kk, "vertex": v, "forward": a.A(v), "backward": b.A(v)})
                return

    count = 0
    for path in edge_window_paths(g, k, s):
        count += 1
        check(path, k, f"k={k},s={s}")
        if not in_window_family(g, k, reverse(path)):
            rep.fail({"path": path, "reason": "reversal leaves the path family"})
        # induction on s: prefixes of length s-1 ... k stay in the family and satisfy the claim
        for t in range(s - 1, k - 1, -1):
            check(path[: t + 1], k, f"k={k},s={t}")
        # induction on k at s == k: the length-j prefix of the base window, window j
        base = path[: k + 1]
        for j in range(k - 1, 0, -1):
            check(base[: j + 1], j, f"k={j},s={j}")
    rep.details = {"paths": count, "checks_per_level": dict(sorted(levels.items()))}
    rep.wall_time = time.perf_counter() - t0
    return rep


def in_window_family(g: Graph, k: int, path: Sequence[int]) -> bool:
    """Membership of a path in the window-distinct family of its own length."""
    s = len(path) - 1
    return all(g.has_edge(a, b) for a, b in zip(path, path[1:])) and all(
        is_edge_distinct(path[i: i + k + 1]) for i in range(0, s - k + 1))


# ---------------------------------------------------------------- trajectory / kernel symmetries


def _walk_setup(g: Graph, k: int, mode: str) -> tuple[Kernel, Measure]:
    if mode == "nbrw":
        B = nbrw_kernel(g)
        return B, Measure.counting(B.space)
    if mode == "edge_knbrw":
        st = stuck_check(g, k, "edge")
        if not st.never_stuck:
            raise KernelError(f"edge {k}-NBRW on {g.name} can get stuck at {st.stuck_states[0]}")
        P, _ = knbrw_kernel(g, k, "edge")
        return P, pi_ke_measure(g, P.space)
    raise KernelError(f"unknown walk mode {mode!r}")


def trajectories(P: Kernel, n: int, cap: int = TRAJECTORY_CAP) -> Iterator[tuple[tuple[int, ...], object]]:
    """All positive-probability index trajectories of ``n`` steps with their probabilities."""
    count = 0

    def extend(traj, prob):
        nonlocal count
        if len(traj) == n + 1:
            count += 1
            if count > cap:
                raise ResourceCapError(f"more than {cap} trajectories", count)
            yield traj, prob
            return
        for j, v in P.rows[traj[-1]].items():
            yield from extend(traj + (j,), prob * v)

    for i in range(len(P)):
        yield from extend((i,), Fraction(1) if P.exact else 1.0)


def verify_trajectory_symmetry(g: Graph, k: int, n: int, mode: str = "nbrw",
                               cap: int = TRAJECTORY_CAP) -> IdentityReport:
    """``pi(a_0) prod P(a_i, a_{i+1}) == pi(a_n) prod P(a_{n-i}^r, a_{n-i-1}^r)`` for every trajectory."""
    t0 = time.perf_counter()
    P, pi = _walk_setup(g, k, mode)
    rep = IdentityReport(f"trajectory_symmetry[{mode}]", g.name, k, n)
    rev = reversal_map(P.space)
    count = 0
    for traj, prob in trajectories(P, n, cap):
        count += 1
        back = Fraction(1)
        for i in range(n):
            back *= P.entry(rev[traj[n - i]], rev[traj[n - i - 1]])
        lhs, rhs = pi.weights[traj[0]] * prob, pi.weights[traj[-1]] * back
        if lhs != rhs:
            rep.fail({"trajectory": [P.space[i] for i in traj], "forward": lhs, "backward": rhs})
    rep.details = {"trajectories": count, "states": len(P)}
    rep.wall_time = time.perf_counter() - t0
    return rep


def _power_rows(P: Kernel, n: int) -> list[dict[int, object]]:
    rows = []
    one = Fraction(1) if P.exact else 1.0
    for i in range(len(P)):
        dist = {i: one}
        for _ in range(n):
            dist = P.push(dist)
        rows.append({j: v for j, v in dist.items() if v != 0})
    return rows


def kernel_symmetry_violations(P: Kernel, pi: Measure, n: int) -> list[dict]:
    """Entries where ``pi(a) P^n(a, b) != pi(b) P^n(b^r, a^r)``."""
    rev = reversal_map(P.space)
    rows = _power_rows(P, n)
    pairs = {(a, b) for a, row in enumerate(rows) for b in row}
    pairs |= {(rev[y], rev[x]) for x, row in enumerate(rows) for y in row}
    bad = []
    for a, b in sorted(pairs):
        lhs = pi.weights[a] * rows[a].get(b, 0)
        rhs = pi.weights[b] * rows[rev[b]].get(rev[a], 0)
        if lhs != rhs:
            bad.append({"a": P.space[a], "b": P.space[b], "lhs": lhs, "rhs": rhs})
    return bad


def verify_kernel_symmetry(g: Graph, k: int, n: int, mode: str = "nbrw") -> IdentityReport:
    """Kernel-level symmetry for ``P^n``; for the NBRW also for the lazy kernel ``(I + B)/2``."""
    t0 = time.perf_counter()
    P, pi = _walk_setup(g, k, mode)
    rep = IdentityReport(f"kernel_symmetry[{mode}]", g.name, k, n)
    for w in kernel_symmetry_violations(P, pi, n):
        rep.fail(w)
    if mode == "nbrw":
        for w in kernel_symmetry_violations(lazy(P), pi, n):
            rep.fail({"lazy": True, **w})
    rep.details = {"states": len(P)}
    rep.wall_time = time.perf_counter() - t0
    return rep


def verify_stationarity(g: Graph, k: int) -> IdentityReport:
    """Exact check that the product weights are stationary for the edge k-NBRW (stuck-free only)."""
    t0 = time.perf_counter()
    rep = IdentityReport("edge_stationarity", g.name, k, None)
    P, pi = _walk_setup(g, k, "edge_knbrw")
    res = check_stationary_reversible(P, pi)
    if not res.stationary:
        rep.fail({"state": res.stationary_witness, "violation": res.worst_stationary})
    ratio = max(pi.weights) / min(pi.weights)
    bound = (g.max_degree - 1) ** (k - 1)
    if ratio > bound:
        rep.fail({"ratio": ratio, "bound": bound})
    rep.details = {"states": len(P), "reversible": res.reversible, "max_ratio": ratio}
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- vertex-walk failure witnesses


@dataclass
class VertexWitness:
    graph: str
    k: int
    kind: str                      # "cycle" or "support"
    trajectory: list
    forward: object
    backward: object


def find_vertex_symmetry_witness(g: Graph, k: int = 2, n_max: int = 8) -> VertexWitness | None:
    """Search for a measure-free obstruction to the trajectory symmetry of the vertex k-NBRW.

    A closed trajectory ``a_0, ..., a_n = a_0`` forces ``prod P(a_i, a_{i+1})`` to equal the
    product along the reversed trajectory for any candidate measure, and a forward-possible
    trajectory whose reversal is impossible rules out every positive measure.
    """
    P, _ = knbrw_kernel(g, k, "vertex")
    try:
        rev = reversal_map(P.space)
    except KernelError:
        rev = None
    for n in range(1, n_max + 1):
        for traj, prob in trajectories(P, n):
            if rev is None:
                # some reachable state has no reversal in the state space
                return VertexWitness(g.name, k, "support", [P.space[i] for i in traj], prob, Fraction(0))
            back = Fraction(1)
            for i in range(n):
                back *= P.entry(rev[traj[n - i]], rev[traj[n - i - 1]])
            if back == 0:
                return VertexWitness(g.name, k, "support", [P.space[i] for i in traj], prob, back)
            if traj[0] == traj[-1] and back != prob:
                return VertexWitness(g.name, k, "cycle", [P.space[i] for i in traj], prob, back)
    return None
