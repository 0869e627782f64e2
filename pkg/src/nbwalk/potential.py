"""Dirichlet forms, capacities, flows between networks and cut-set bounds."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .graphs import Graph, Network
from .kernels import (Kernel, KernelError, Measure, NotStationaryError, _from_fmpq, _to_fmpq,
                      UnreachableError, check_stationary_reversible, time_reversal)


# ---------------------------------------------------------------- Dirichlet forms


def _form(P: Kernel, pi: Measure, f: Sequence) -> Fraction | float:
    half = Fraction(1, 2) if P.exact and pi.exact and all(isinstance(x, (int, Fraction)) for x in f) else 0.5
    total = 0
    for i, r in enumerate(P.rows):
        for j, v in r.items():
            total += pi.weights[i] * v * (f[i] - f[j]) ** 2
    return half * total


@dataclass(frozen=True)
class DirichletReport:
    value: Fraction | float
    reversal_value: Fraction | float
    symmetrized_value: Fraction | float
    agree: bool


def dirichlet_form(P: Kernel, pi: Measure, f: Sequence, check_equalities: bool = False,
                   tol: float = 1e-12):
    """``1/2 sum_x,y pi(x) P(x, y) (f(x) - f(y))^2``.

    With ``check_equalities`` the same form is evaluated for the time reversal and the
    additive symmetrization and a :class:`DirichletReport` is returned.
    """
    rep = check_stationary_reversible(P, pi, tol)
    if not rep.stationary:
        raise NotStationaryError(f"measure not stationary (at {rep.stationary_witness!r})")
    if len(f) != len(P):
        raise KernelError("function must have one value per state")
    val = _form(P, pi, f)
    if not check_equalities:
        return val
    star = time_reversal(P, pi, tol)
    v_star = _form(star, pi, f)
    half = Fraction(1, 2) if P.exact else 0.5
    v_sym = half * (val + v_star)
    exact = P.exact and pi.exact and all(isinstance(x, (int, Fraction)) for x in f)
    agree = (val == v_star == v_sym) if exact else (abs(val - v_star) <= 1e-9 * max(1, abs(val))
                                                     and abs(val - v_sym) <= 1e-9 * max(1, abs(val)))
    return DirichletReport(val, v_star, v_sym, agree)


# ---------------------------------------------------------------- capacity


@dataclass
class CapacityProblem:
    """Kernel with a stationary measure, a source set ``A`` and a ground set ``Z`` (labels)."""

    kernel: Kernel
    pi: Measure
    A: tuple
    Z: tuple

    def __post_init__(self):
        self.A, self.Z = tuple(self.A), tuple(self.Z)
        if not self.A or not self.Z:
            raise KernelError("A and Z must be nonempty")
        if set(self.A) & set(self.Z):
            raise KernelError("A and Z must be disjoint")

    @classmethod
    def from_network(cls, N: Network, A: Sequence[int], Z: Sequence[int]) -> "CapacityProblem":
        from .kernels import network_kernel

        P, pi = network_kernel(N)
        return cls(P, pi, tuple(P.space[a] for a in A), tuple(P.space[z] for z in Z))


@dataclass
class CapacityResult:
    capacity: Fraction | float
    potential: list                       # harmonic extension (1 on A, 0 on Z)
    perturbation_min_gap: float | None = None
    perturbations: int = 0


def _conductances(P: Kernel, pi: Measure) -> dict[tuple[int, int], object]:
    cond: dict[tuple[int, int], object] = {}
    for i, r in enumerate(P.rows):
        for j, v in r.items():
            if i < j:
                cond[(i, j)] = pi.weights[i] * v
    return cond


def _energy(cond: Mapping[tuple[int, int], object], f: Sequence):
    return sum(c * (f[i] - f[j]) ** 2 for (i, j), c in cond.items())


def capacity_reversible(prob: CapacityProblem, perturbations: int = 0, seed: int = 0,
                        tol: float = 1e-12) -> CapacityResult:
    """Effective conductance between ``A`` and ``Z`` from the Laplacian of ``c(x, y) = pi(x) P(x, y)``.

    The harmonic extension is found by one linear solve; with ``perturbations > 0`` the
    energy is re-evaluated at random feasible perturbations, which must never be smaller.
    """
    P, pi = prob.kernel, prob.pi
    rep = check_stationary_reversible(P, pi, tol)
    if not rep.reversible:
        raise KernelError(f"kernel is not reversible for the measure (at {rep.reversible_witness!r})")
    n = len(P)
    Ai = {P.space.index(a) for a in prob.A}
    Zi = {P.space.index(z) for z in prob.Z}
    cond = _conductances(P, pi)
    nbrs: list[dict[int, object]] = [dict() for _ in range(n)]
    for (i, j), c in cond.items():
        nbrs[i][j] = c
        nbrs[j][i] = c
    # interior states must connect to A or Z
    seen = set(Ai | Zi)
    stack = list(seen)
    while stack:
        i = stack.pop()
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    interior = [i for i in range(n) if i not in Ai and i not in Zi]
    lost = [i for i in interior if i not in seen]
    if lost:
        raise KernelError(f"state {P.space[lost[0]]!r} is not connected to A or Z")
    pos = {x: r for r, x in enumerate(interior)}
    exact = P.exact and pi.exact
    f = [None] * n
    for i in Ai:
        f[i] = Fraction(1) if exact else 1.0
    for i in Zi:
        f[i] = Fraction(0) if exact else 0.0
    m = len(interior)
    if m:
        if exact:
            import flint

            L = flint.fmpq_mat(m, m)
            b = flint.fmpq_mat(m, 1)
            for r, x in enumerate(interior):
                for y, c in nbrs[x].items():
                    cq = _to_fmpq(c)
                    L[r, r] = L[r, r] + cq
                    if y in pos:
                        L[r, pos[y]] = L[r, pos[y]] - cq
                    elif y in Ai:
                        b[r, 0] = b[r, 0] + cq
            sol = L.solve(b)
            for r, x in enumerate(interior):
                f[x] = _from_fmpq(sol[r, 0])
        else:
            import scipy.sparse as sp
            import scipy.sparse.linalg as spla

            rr, cc, vv = [], [], []
            b = np.zeros(m)
            for r, x in enumerate(interior):
                for y, c in nbrs[x].items():
                    c = float(c)
                    rr.append(r)
                    cc.append(r)
                    vv.append(c)
                    if y in pos:
                        rr.append(r)
                        cc.append(pos[y])
                        vv.append(-c)
                    elif y in Ai:
                        b[r] += c
            sol = spla.splu(sp.csc_matrix((vv, (rr, cc)), shape=(m, m))).solve(b)
            for r, x in enumerate(interior):
                f[x] = float(sol[r])
    cap = _energy(cond, f)
    out = CapacityResult(cap, f)
    if perturbations:
        rng = np.random.default_rng(seed)
        base = float(cap)
        gap = math.inf
        ff = np.array([float(x) for x in f])
        for _ in range(perturbations):
            g = ff.copy()
            idx = np.array(interior, dtype=np.int64)
            if len(idx):
                g[idx] += rng.uniform(-1, 1, len(idx)) * rng.uniform(0, 0.5)
            gap = min(gap, float(_energy(cond, g)) - base)
        out.perturbation_min_gap, out.perturbations = gap, perturbations
    return out


def escape_probabilities(prob: CapacityProblem) -> dict:
    """``P_a[T_Z < T_A^+]`` for every ``a`` in ``A``.

    ``u(x) = P_x[T_Z < T_A]`` solves one linear system on the states outside ``A`` and ``Z``;
    every such state must reach ``A`` or ``Z``.
    """
    P = prob.kernel
    Ai = {P.space.index(a) for a in prob.A}
    Zi = {P.space.index(z) for z in prob.Z}
    stop = Ai | Zi
    # states that can reach A or Z, by a backward search
    pred = P.predecessors
    can = set(stop)
    stack = list(stop)
    while stack:
        j = stack.pop()
        for i in pred[j]:
            if i not in can:
                can.add(i)
                stack.append(i)
    inner = [i for i in range(len(P)) if i not in stop]
    for i in inner:
        if i not in can:
            raise UnreachableError(f"A and Z are unreachable from {P.space[i]!r}", P.space[i])
    pos = {x: r for r, x in enumerate(inner)}
    m = len(inner)
    u: dict[int, object] = {}
    if m and P.exact:
        import flint

        M = flint.fmpq_mat(m, m)
        b = flint.fmpq_mat(m, 1)
        for r, x in enumerate(inner):
            M[r, r] = flint.fmpq(1)
            for j, v in P.rows[x].items():
                if j in pos:
                    M[r, pos[j]] = M[r, pos[j]] - _to_fmpq(v)
                elif j in Zi:
                    b[r, 0] = b[r, 0] + _to_fmpq(v)
        sol = M.solve(b)
        u = {x: _from_fmpq(sol[r, 0]) for r, x in enumerate(inner)}
    elif m:
        import scipy.sparse as sp
        import scipy.sparse.linalg as spla

        rr, cc, vv = list(range(m)), list(range(m)), [1.0] * m
        b = np.zeros(m)
        for r, x in enumerate(inner):
            for j, v in P.rows[x].items():
                if j in pos:
                    rr.append(r)
                    cc.append(pos[j])
                    vv.append(-float(v))
                elif j in Zi:
                    b[r] += float(v)
        sol = spla.splu(sp.csc_matrix((vv, (rr, cc)), shape=(m, m))).solve(b)
        u = {x: float(sol[r]) for r, x in enumerate(inner)}
    one = Fraction(1) if P.exact else 1.0
    out = {}
    for a in prob.A:
        i = P.space.index(a)
        acc = 0 * one
        for j, v in P.rows[i].items():
            if j in Zi:
                acc += v
            elif j in pos:
                acc += v * u[j]
        out[a] = acc
    return out


def capacity_nonreversible(prob: CapacityProblem, tol: float = 1e-12) -> Fraction | float:
    """``sum_{a in A} pi(a) P_a[T_Z < T_A^+]``; valid without reversibility."""
    rep = check_stationary_reversible(prob.kernel, prob.pi, tol)
    if not rep.stationary:
        raise NotStationaryError(f"measure not stationary (at {rep.stationary_witness!r})")
    esc = escape_probabilities(prob)
    return sum((prob.pi(a) * v for a, v in esc.items()), start=0 * prob.pi.weights[0])


# ---------------------------------------------------------------- flows


class FlowError(ValueError):
    def __init__(self, msg: str, edge=None):
        super().__init__(msg)
        self.edge = edge


@dataclass
class Flow:
    """Routes each directed target edge ``(x, y)`` through weighted paths of the source network.

    Paths are vertex tuples of the source graph; a repeated vertex uses its loop.
    Target loops carry no energy and are not routed.
    """

    source: Network
    target: Network
    paths: dict[tuple[int, int], dict[tuple[int, ...], object]]
    tail_bound: float = 0.0               # certified truncation error carried by the flow

    def validate(self, tol: float | None = None) -> None:
        """Raise :class:`FlowError` naming the first target edge that breaks a flow axiom."""
        g = self.source.graph
        exact = tol is None
        tol = 0 if exact else tol
        need = {(x, y) for (u, v) in self.target.graph.edges if u != v for x, y in ((u, v), (v, u))}
        extra = set(self.paths) - need
        if extra:
            raise FlowError("paths given for a pair that is not a target edge", next(iter(extra)))
        for e in sorted(need):
            x, y = e
            routes = self.paths.get(e)
            if not routes:
                raise FlowError(f"target edge {e} has no routes", e)
            total = 0
            for gamma, w in routes.items():
                if gamma[0] != x or gamma[-1] != y or len(gamma) < 2:
                    raise FlowError(f"path {gamma} does not join {x} to {y}", e)
                for a, b in zip(gamma, gamma[1:]):
                    if not g.has_edge(a, b):
                        raise FlowError(f"path {gamma} uses a non-edge ({a}, {b})", e)
                if w < 0:
                    raise FlowError(f"negative weight on {gamma}", e)
                back = self.paths[(y, x)].get(gamma[::-1], 0)
                if abs(back - w) > tol:
                    raise FlowError(f"weight of {gamma} differs from its reversal", e)
                total += w
            c = self.target.c(x, y)
            if abs(total - c) > tol * max(1, abs(c)):
                raise FlowError(f"routes of {e} carry {total}, conductance is {c}", e)


@dataclass
class Congestion:
    per_edge: dict[tuple[int, int], object]
    A: object
    argmax: tuple | None


def flow_congestion(phi: Flow, tol: float | None = None) -> Congestion:
    """``A_{u,v} = c_{uv}^{-1} sum_{(x,y)} sum_gamma r((u,v), gamma) |gamma| Phi_{x,y}(gamma)``."""
    phi.validate(tol)
    load: dict[tuple[int, int], object] = {}
    for routes in phi.paths.values():
        for gamma, w in routes.items():
            L = len(gamma) - 1
            for a, b in zip(gamma, gamma[1:]):
                load[(a, b)] = load.get((a, b), 0) + L * w
    per = {}
    for (a, b), s in load.items():
        per[(a, b)] = s / phi.source.c(a, b)
    if not per:
        return Congestion({}, 0, None)
    arg = max(per, key=lambda e: per[e])
    return Congestion(per, per[arg], arg)


def identity_flow(N: Network, target: Network | None = None) -> Flow:
    """Each target edge routed over the same source edge with its full conductance."""
    target = N if target is None else target
    paths = {}
    for (u, v), c in target.conductance.items():
        if u == v:
            continue
        if not N.graph.has_edge(u, v):
            raise FlowError(f"target edge ({u}, {v}) is not a source edge", (u, v))
        paths[(u, v)] = {(u, v): c}
        paths[(v, u)] = {(v, u): c}
    return Flow(N, target, paths)


@dataclass
class ComparisonReport:
    congestion: object
    trials: int
    violations: list
    worst_ratio: float
    capacity_checks: int = 0
    capacity_violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.capacity_violations


def random_ball_function(g: Graph, rng: np.random.Generator, radius: int | None = None) -> np.ndarray:
    """Values i.i.d. uniform on [-1, 1] on a random ball, zero elsewhere."""
    from .graphs import bfs_distances

    centre = int(rng.integers(g.n))
    r = int(rng.integers(0, 3)) if radius is None else radius
    f = np.zeros(g.n)
    ball = list(bfs_distances(g, centre, r))
    f[ball] = rng.uniform(-1, 1, len(ball))
    return f


def _network_capacity(N: Network, A: Sequence[int], Z: Sequence[int]) -> float:
    prob = CapacityProblem.from_network(Network(N.graph, {e: float(c) for e, c in N.conductance.items()}), A, Z)
    return float(capacity_reversible(prob).capacity)


def verify_flow_comparison(phi: Flow, trials: int = 100, seed: int = 0, tol: float = 1e-9,
                           capacity_trials: int = 0, flow_tol: float | None = None) -> ComparisonReport:
    """Random-function check of ``E_target(f) <= A(Phi) E_source(f)`` plus capacity comparisons.

    Both networks must share their vertex set. Capacities use random disjoint singleton
    or small sets ``A``, ``Z``.
    """
    cong = flow_congestion(phi, flow_tol)
    A = float(cong.A)
    src, tgt = phi.source, phi.target
    if src.graph.n != tgt.graph.n:
        raise FlowError("source and target must share vertices")
    rng = np.random.default_rng(seed)
    viol, worst = [], 0.0
    for t in range(trials):
        f = random_ball_function(src.graph, rng)
        e_t = float(tgt.energy(f))
        e_s = float(src.energy(f))
        if e_t > A * e_s + tol * max(1.0, e_t):
            viol.append({"trial": t, "target_energy": e_t, "bound": A * e_s})
        if e_s > 0:
            worst = max(worst, e_t / e_s)
    cap_v = []
    n = src.graph.n
    for t in range(capacity_trials):
        perm = rng.permutation(n)
        a = int(rng.integers(1, max(2, n // 4)))
        z = int(rng.integers(1, max(2, n // 4)))
        As, Zs = [int(x) for x in perm[:a]], [int(x) for x in perm[a:a + z]]
        try:
            ct = _network_capacity(tgt, As, Zs)
            cs = _network_capacity(src, As, Zs)
        except KernelError:
            continue
        if ct > A * cs + tol * max(1.0, ct):
            cap_v.append({"A": As, "Z": Zs, "target": ct, "bound": A * cs})
    return ComparisonReport(cong.A, trials, viol, worst, capacity_trials, cap_v)


# ---------------------------------------------------------------- the lifted flow on the line graph


def loop_line_network(g: Graph) -> tuple[Network, tuple]:
    """Line graph of ``g`` with a loop at every vertex, unit conductances; labels are the edges."""
    from .walks import line_graphs

    lg = line_graphs(g)
    weights = {(u, v): Fraction(1) for u, v in lg.edge_graph.edges}
    for e in range(len(lg.edge_labels)):
        weights[(e, e)] = Fraction(1)
    return Network.from_weights(len(lg.edge_labels), weights, labels=lg.edge_labels), lg.edge_labels


def lazy_nbrw(g: Graph) -> Kernel:
    from .kernels import lazy
    from .walks import nbrw_kernel

    return lazy(nbrw_kernel(g))


def backtrack_weight(g: Graph, p, edge_path: Sequence[int], edges: Sequence[tuple[int, int]],
                     BL: Kernel | None = None):
    """Weight ``((1-p)^l p / 2) prod B_L`` of a line-graph path through its unique lift.

    All-equal paths use ``((1-p)^l p / 2) 2^{-l}``; paths without a lift weigh zero.
    """
    BL = lazy_nbrw(g) if BL is None else BL
    l = len(edge_path) - 1
    base = (1 - p) ** l * p / 2
    if all(e == edge_path[0] for e in edge_path):
        return base * Fraction(1, 2) ** l if not isinstance(p, float) else base * 0.5 ** l
    lift = lift_edge_path(g, edge_path, edges)
    if lift is None:
        return 0 * base
    prod = 1
    for a, b in zip(lift, lift[1:]):
        v = BL(a, b)
        if v == 0:
            return 0 * base
        prod = prod * v
    return base * prod


def lift_edge_path(g: Graph, edge_path: Sequence[int], edges: Sequence[tuple[int, int]]):
    """The unique directed lift ``(a_0, ..., a_l)`` with consecutive directed edges joined head to tail.

    Returns ``None`` for all-equal paths (two lifts) and for paths without a lift.
    """
    j = next((i for i in range(len(edge_path) - 1) if edge_path[i] != edge_path[i + 1]), None)
    if j is None:
        return None
    e, f = edges[edge_path[j]], edges[edge_path[j + 1]]
    shared = set(e) & set(f)
    if len(shared) != 1:
        return None
    s = shared.pop()
    a = (e[0] if e[1] == s else e[1], s)
    lift = [a] * (j + 1)
    cur = a
    for k in range(j + 1, len(edge_path)):
        nxt = edges[edge_path[k]]
        if edge_path[k] == edge_path[k - 1]:
            lift.append(cur)
            continue
        if cur[1] not in nxt:
            return None
        w = nxt[0] if nxt[1] == cur[1] else nxt[1]
        cur = (cur[1], w)
        lift.append(cur)
    return lift


@dataclass
class LiftedFlowReport:
    flow: Flow
    W: Kernel
    truncated_mass: dict[tuple[int, int], object]
    max_mass_gap: float
    tail_bound: float
    congestion: Congestion
    truncated_congestion: Congestion | None
    congestion_bound: float
    tau_fourth_moment: float
    splits_checked: int
    split_failures: list
    paths: int


def tau_fourth_moment(p) -> float:
    """``E[tau^4]`` for ``P(tau = t) = (1 - p)^t p``, ``t >= 0`` (the first mark time)."""
    q = 1 - float(p)
    p = float(p)
    # moments of the geometric law on {0, 1, ...} via Stirling numbers of the second kind
    stirling = [0, 1, 7, 6, 1]
    falling = [math.factorial(k) * (q / p) ** k for k in range(5)]
    return float(sum(s * m for s, m in zip(stirling, falling)))


def _enumerate_lifts(BL: Kernel, ell_max: int) -> list:
    """Depth-first lifted paths (state index tuples) of length 1..ell_max with their B_L products."""
    out = []
    for s in range(len(BL)):
        stack = [((s,), 1)]
        while stack:
            path, prod = stack.pop()
            if len(path) > 1:
                out.append((path, prod))
            if len(path) - 1 == ell_max:
                continue
            for j, v in BL.rows[path[-1]].items():
                stack.append((path + (j,), prod * v))
    return out


def lifted_backtrack_flow(g: Graph, p, ell_max: int, exact: bool = True,
                          check_splits: bool = True, tau_samples: int = 0, seed: int = 0) -> LiftedFlowReport:
    """Flow from the looped line graph network to the auxiliary network ``W`` of the p-BRW.

    Every lifted lazy-NBRW path of length at most ``ell_max`` that is not constant is
    projected to the line graph and carries ``((1-p)^l p / 2) prod B_L``. The mass
    missing from each target pair (truncation tail, plus the constant paths when the
    pair is a loop) is routed over a shortest line-graph path so the result is a flow.
    """
    from .auxiliary import exact_W, residual_kernel
    from .walks import pbrw_kernel

    if g.min_degree < 2:
        raise KernelError("minimum degree 2 required")
    if ell_max < 1:
        raise KernelError("ell_max must be >= 1")
    p = Fraction(p) if exact and not isinstance(p, float) else float(p)
    U, edges = loop_line_network(g)
    eidx = {e: i for i, e in enumerate(edges)}
    BL = lazy_nbrw(g)
    if not exact:
        BL = BL.to_float()
    base = pbrw_kernel(g, p)
    aux = exact_W(residual_kernel(base, p))
    # W classes are ((x, y), (y, x)); map to edge indices
    cls_edge = [eidx[(min(c[0]), max(c[0]))] for c in aux.classes]
    m = len(edges)
    Wm: dict[tuple[int, int], object] = {}
    for i, r in enumerate(aux.W.rows):
        for j, v in r.items():
            Wm[(cls_edge[i], cls_edge[j])] = v
    target = Network.from_weights(m, {(a, b): v for (a, b), v in Wm.items() if a <= b}, labels=edges)

    darts = BL.space
    dart_edge = [eidx[(min(a), max(a))] for a in darts]
    raw = _enumerate_lifts(BL, ell_max)
    paths: dict[tuple[int, int], dict[tuple[int, ...], object]] = {}
    mass: dict[tuple[int, int], object] = {}
    n_paths = 0
    for lift, prod in raw:
        proj = tuple(dart_edge[i] for i in lift)
        if all(x == proj[0] for x in proj):
            continue
        l = len(lift) - 1
        w = (1 - p) ** l * p / 2 * prod
        key = (proj[0], proj[-1])
        mass[key] = mass.get(key, 0) + w
        if key[0] != key[1]:
            paths.setdefault(key, {})[proj] = paths.get(key, {}).get(proj, 0) + w
            n_paths += 1
    truncated = {}
    gap = 0.0
    for (a, b), c in Wm.items():
        got = mass.get((a, b), 0)
        truncated[(a, b)] = got
        if a != b:
            gap = max(gap, float(c - got))
    trunc_cong = None
    # complete the missing mass along shortest line-graph paths (reversal-consistent)
    sp_paths = _shortest_paths(U.graph, m)
    for (a, b), c in Wm.items():
        if a >= b:
            continue
        rest = c - mass.get((a, b), 0)
        if rest == 0:
            continue
        route = sp_paths[(a, b)]
        fwd = paths.setdefault((a, b), {})
        bwd = paths.setdefault((b, a), {})
        fwd[route] = fwd.get(route, 0) + rest
        bwd[route[::-1]] = bwd.get(route[::-1], 0) + rest
    tail = float((1 - p) ** (ell_max + 1))
    phi = Flow(U, target, paths, tail_bound=tail)
    cong = flow_congestion(phi, None if exact else 1e-12)
    # congestion of the truncated part alone (partial sums)
    load: dict[tuple[int, int], float] = {}
    for lift, prod in raw:
        proj = tuple(dart_edge[i] for i in lift)
        if proj[0] == proj[-1]:
            continue
        l = len(lift) - 1
        w = float((1 - p) ** l * p / 2 * prod)
        for x, y in zip(proj, proj[1:]):
            load[(x, y)] = load.get((x, y), 0.0) + l * w
    per = {e: v / float(U.c(*e)) for e, v in load.items()}
    arg = max(per, key=per.get) if per else None
    trunc_cong = Congestion(per, per[arg] if arg else 0.0, arg)
    m4 = tau_fourth_moment(p)
    if tau_samples:
        rng = np.random.default_rng(seed)
        samples = rng.geometric(float(p), tau_samples) - 1
        emp = float(np.mean(samples.astype(float) ** 4))
        m4 = max(m4, emp)
    bound = 8 / float(p) * m4
    fails, checked = [], 0
    if check_splits:
        checked, fails = check_splitting_identity(g, p, ell_max, BL=lazy_nbrw(g))
    return LiftedFlowReport(phi, aux.W, truncated, gap, tail, cong, trunc_cong, bound, m4, checked, fails, n_paths)


def _shortest_paths(g: Graph, m: int) -> dict[tuple[int, int], tuple[int, ...]]:
    out = {}
    for s in range(m):
        prev = {s: None}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.adjacency[u]:
                if w not in prev:
                    prev[w] = u
                    q.append(w)
        for t in prev:
            if t <= s:
                continue
            route = [t]
            while route[-1] != s:
                route.append(prev[route[-1]])
            out[(s, t)] = tuple(route[::-1])
    return out


def check_splitting_identity(g: Graph, p, ell_max: int, BL: Kernel | None = None) -> tuple[int, list]:
    """Check ``rho(e_0..e_l) = (2/p) rho(e_i..e_0) rho(e_i..e_l)`` on every liftable non-constant path.

    Returns the number of (path, split) pairs checked and the failures.
    """
    p = Fraction(p) if not isinstance(p, float) else p
    BL = lazy_nbrw(g) if BL is None else BL
    edges = g.edges
    eidx = {e: i for i, e in enumerate(edges)}
    dart_edge = [eidx[(min(a), max(a))] for a in BL.space]
    checked, fails = 0, []
    seen = set()
    for lift, _ in _enumerate_lifts(BL, ell_max):
        proj = tuple(dart_edge[i] for i in lift)
        if proj in seen or all(x == proj[0] for x in proj):
            continue
        seen.add(proj)
        rho = backtrack_weight(g, p, proj, edges, BL)
        for i in range(len(proj)):
            left = backtrack_weight(g, p, proj[: i + 1][::-1], edges, BL)
            right = backtrack_weight(g, p, proj[i:], edges, BL)
            rhs = 2 / p * left * right
            checked += 1
            ok = rho == rhs if not isinstance(p, float) else abs(rho - rhs) <= 1e-15
            if not ok:
                fails.append({"path": proj, "split": i, "rho": rho, "product": rhs})
    return checked, fails


def backtrack_easy_flow(g: Graph, p) -> Flow:
    """Flow from ``W`` to the looped line graph: every line-graph edge routed over itself."""
    rep_W = _w_network(g, p)
    U, _ = loop_line_network(g)
    return identity_flow(rep_W, U)


def _w_network(g: Graph, p) -> Network:
    from .auxiliary import exact_W, residual_kernel
    from .walks import pbrw_kernel

    U, edges = loop_line_network(g)
    eidx = {e: i for i, e in enumerate(edges)}
    aux = exact_W(residual_kernel(pbrw_kernel(g, p), p))
    cls_edge = [eidx[(min(c[0]), max(c[0]))] for c in aux.classes]
    weights = {}
    for i, r in enumerate(aux.W.rows):
        for j, v in r.items():
            a, b = cls_edge[i], cls_edge[j]
            if a <= b:
                weights[(a, b)] = v
    return Network.from_weights(len(edges), weights, labels=edges)


# ---------------------------------------------------------------- cut sets


class CutsetError(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass
class NashWilliamsReport:
    bound: Fraction | float
    partial: list                       # running sums after each cut set
    shell_conductance: list


def nash_williams(N: Network, source: int, boundary: Sequence[int], cutsets: Sequence[Sequence[tuple[int, int]]]
                  ) -> NashWilliamsReport:
    """Lower bound ``sum_n (sum_{e in Pi_n} c_e)^{-1}`` on the resistance from ``source`` to ``boundary``."""
    g = N.graph
    used: set[tuple[int, int]] = set()
    bset = set(boundary)
    partial, shells = [], []
    total = 0
    for k, cut in enumerate(cutsets):
        cut = {(min(u, v), max(u, v)) for u, v in cut}
        for e in cut:
            if not g.has_edge(*e):
                raise CutsetError(f"cut set {k} contains the non-edge {e}")
        if cut & used:
            raise CutsetError(f"cut set {k} overlaps an earlier one", sorted(cut & used)[0])
        used |= cut
        # BFS from the source avoiding the cut
        prev = {source: None}
        q = deque([source])
        hit = None
        while q and hit is None:
            u = q.popleft()
            if u in bset:
                hit = u
                break
            for w in g.adjacency[u]:
                if (min(u, w), max(u, w)) in cut or w in prev:
                    continue
                prev[w] = u
                q.append(w)
        if hit is not None:
            path = [hit]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            raise CutsetError(f"cut set {k} does not separate the source from the boundary", path[::-1])
        c = sum(N.c(*e) for e in cut)
        shells.append(c)
        total = total + (1 / c if not isinstance(c, (int, Fraction)) else Fraction(1) / c)
        partial.append(total)
    return NashWilliamsReport(total, partial, shells)
