"""Command-line front end.

Exit codes: 0 everything passed, 1 an identity or feasibility check failed,
2 configuration or input error, 3 a resource cap was hit.

CSV columns
-----------
walk:      walk,d,L,replicas,mean_returns,stderr
capacity:  experiment,walk,size,capacity  (box sweeps)
           radius,base_capacity,subdivided_capacity,nash_williams_bound,subdivided_vertices
cover:     regenerations,success_rate,stderr,slope,intercept,r2,lag1,lag1_sigma,mean_increment
aux:       step,state,candidate,xi,accepted  (with --dump-trajectory)
report:    key,value  (numeric leaves of the merged report, with --csv)
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, GraphSource, load_config, replica_rngs, seed_sequence
from .graphs import Graph, GraphError, check_structural_condition, generate, read_graph_file
from .kernels import KernelError
from .serialize import dumps, provenance, write_kernel
from .walks import ResourceCapError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        v = int(v)
    except ValueError:
        pass
    return k, v


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_graph(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config (schema nbwalk-config/1)")
    p.add_argument("--graph", help="graph file (u v [conductance] per line)")
    p.add_argument("--generator", help="generator family: complete, cycle, path, box, torus, tree, bowtie, chords")
    p.add_argument("--param", action="append", type=_param, default=[], help="generator parameter key=value")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--mode", choices=("edge", "vertex"), default=None)
    p.add_argument("--p", default=None, help="backtrack probability (rational like 1/2 or decimal)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cap-states", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    if getattr(args, "graph", None):
        cfg.graph = GraphSource(file=args.graph)
    elif getattr(args, "generator", None):
        cfg.graph = GraphSource(generator=args.generator, params=dict(args.param))
    for name, attr in (("k", "k"), ("mode", "mode"), ("p", "p")):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg.walk, attr, v)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "cap_states", None) is not None:
        cfg.caps.states = args.cap_states
    if getattr(args, "out", None):
        cfg.output = args.out
    if getattr(args, "format", None):
        cfg.format = args.format
    return cfg


def _load_graph(cfg: ExperimentConfig) -> Graph:
    src = cfg.graph
    if src.file:
        return read_graph_file(src.file)[0]
    if src.generator:
        try:
            return generate(src.generator, **src.params)
        except KeyError as exc:
            raise ConfigError(f"missing generator parameter {exc}", "graph.params") from None
        except TypeError as exc:
            raise ConfigError(str(exc), "graph.params") from None
    raise ConfigError("no graph given (use --graph or --generator)", "graph")


def _parse_p(v) -> Fraction | float | None:
    if v is None:
        return None
    if isinstance(v, float):
        return v
    try:
        return Fraction(str(v))
    except ValueError:
        raise ConfigError(f"bad probability {v!r}", "walk.p") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- identities


def _aux_report(g: Graph, walk: str, k: int) -> dict:
    from .auxiliary import averaged_kernel, backtrack_floor, exact_W, residual_kernel, series_gap
    from .stationary import pi_ke_measure
    from .walks import knbrw_kernel, nbrw_kernel, reversal_access

    if walk == "nbrw":
        P = nbrw_kernel(g)
        pi = None
    else:
        P, _ = knbrw_kernel(g, k, "edge")
        pi = pi_ke_measure(g, P.space)
    ra = reversal_access(P)
    rep = {"identity": "auxiliary_reversibility", "graph": g.name, "k": k, "n": None, "counterexamples": []}
    if math.isinf(ra.worst):
        rep["status"] = "fail"
        rep["counterexamples"].append({
            "diagnostic": backtrack_floor(P).diagnostic,
            "state": ra.worst_state,
        })
        return rep
    M = int(ra.worst)
    D = averaged_kernel(P, M)
    floor = backtrack_floor(D)
    res = residual_kernel(D, floor.floor, pi)
    aux = exact_W(res, pi)
    missing, _ = series_gap(aux, 40)
    tail = (1 - floor.floor) ** 41
    ok = aux.reversible and res.symmetric and all(m == tail for m in missing)
    rep.update(status="pass" if ok else "fail", details={
        "M": M, "floor": floor.floor, "classes": len(aux.classes), "reversible": aux.reversible,
        "residual_symmetric": res.symmetric, "series_tail_exact": all(m == tail for m in missing)})
    if not aux.reversible:
        rep["counterexamples"].append({"W_pair": aux.witness})
    if not res.symmetric:
        rep["counterexamples"].append({"K_pair": res.witness})
    return rep


def _drop_timings(reports: list[dict], keep: bool):
    # wall-clock times would break byte-identical re-runs
    if not keep:
        for r in reports:
            r["wall_time"] = None


def _hashed_config(cfg: ExperimentConfig) -> dict:
    # the output location does not change the results, so it stays out of the hash
    d = cfg.to_dict()
    d.pop("output", None)
    return d


def cmd_identities(args) -> int:
    from .stationary import (find_vertex_symmetry_witness, verify_kernel_symmetry, verify_multiset_reversal,
                             verify_stationarity, verify_trajectory_symmetry)
    from .walks import stuck_check

    cfg = _config_from_args(args)
    g = _load_graph(cfg)
    k, mode, n = cfg.walk.k, cfg.walk.mode, args.n
    suites = args.suite or cfg.suites or ["all"]
    walk = args.walk or ("knbrw" if k > 1 or cfg.walk.kind == "knbrw" or mode == "vertex" else "nbrw")
    reports = []

    def skipped(name, why):
        return {"identity": name, "graph": g.name, "k": k, "n": None, "status": "skipped",
                "counterexamples": [], "details": {"reason": why}}

    want = set(suites)
    every = "all" in want
    if walk == "nbrw":
        if every or "trajectory" in want:
            reports.append(verify_trajectory_symmetry(g, 1, n, "nbrw").to_dict())
        if every or "kernel" in want:
            reports.append(verify_kernel_symmetry(g, 1, n, "nbrw").to_dict())
        if every or "aux" in want:
            reports.append(_aux_report(g, "nbrw", 1))
    elif mode == "edge":
        stuck = stuck_check(g, k, "edge", cfg.caps.states)
        for name, fn in (("stationarity", lambda: verify_stationarity(g, k)),
                         ("trajectory", lambda: verify_trajectory_symmetry(g, k, n, "edge_knbrw")),
                         ("kernel", lambda: verify_kernel_symmetry(g, k, n, "edge_knbrw"))):
            if every or name in want:
                if stuck.never_stuck:
                    reports.append(fn().to_dict())
                else:
                    reports.append(skipped(name, f"walk can get stuck at {stuck.stuck_states[0]}"))
        if every or "multiset" in want:
            reports.append(verify_multiset_reversal(g, k, k + 2).to_dict())
        if every or "aux" in want:
            if stuck.never_stuck:
                reports.append(_aux_report(g, "knbrw", k))
            else:
                reports.append(skipped("auxiliary_reversibility", "walk can get stuck"))
    else:
        if every or "vertex-witness" in want or "kernel" in want or "trajectory" in want:
            wit = find_vertex_symmetry_witness(g, k)
            rep = {"identity": "vertex_trajectory_symmetry", "graph": g.name, "k": k, "n": None,
                   "status": "pass" if wit is None else "fail",
                   "counterexamples": [] if wit is None else [asdict(wit)]}
            reports.append(rep)
    _drop_timings(reports, args.timings)
    status = [r["status"] for r in reports]
    _emit(dumps({"reports": reports, "provenance": provenance(_hashed_config(cfg), cfg.seed)}), cfg.output)
    return EXIT_FAIL if "fail" in status else EXIT_OK


# ---------------------------------------------------------------- walk / capacity


def cmd_walk(args) -> int:
    from .experiments import RETURN_HEADER, returns_before_exit

    seed = args.seed or 0
    rngs = replica_rngs(seed, "walk", len(args.sizes))
    rows = [RETURN_HEADER]
    for L, rng in zip(args.sizes, rngs):
        rows.append(returns_before_exit(args.dims, L, args.walk, args.trials, rng, args.horizon).csv())
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def cmd_capacity(args) -> int:
    from .experiments import CAPACITY_HEADER, SUBDIVISION_HEADER, box_sweep, subdivision_sweep

    p = float(_parse_p(args.p) or 0.5)
    if args.experiment == "box":
        rows = [CAPACITY_HEADER] + [r.csv() for r in box_sweep(args.dims, args.sizes, args.walks, p)]
    else:
        rows = [SUBDIVISION_HEADER] + [r.csv() for r in subdivision_sweep(args.dims, args.sizes)]
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- aux


def cmd_aux(args) -> int:
    from .auxiliary import FloorError, build_auxiliary, empirical_W_and_returns, sample_coupled
    from .walks import nbrw_kernel, pbrw_kernel

    cfg = _config_from_args(args)
    g = _load_graph(cfg)
    p = _parse_p(cfg.walk.p)
    if p is not None:
        base = pbrw_kernel(g, p)
    else:
        base = nbrw_kernel(g)
    try:
        aux = build_auxiliary(base, p)
    except FloorError as exc:
        _emit(dumps({"status": "fail", "diagnostic": str(exc), "graph": g.name}), cfg.output)
        return EXIT_FAIL
    if args.dump_trajectory or args.steps:
        rec = sample_coupled(base, float(aux.p), 0, args.steps, replica_rngs(cfg.seed, "aux", 1)[0])
        if args.dump_trajectory:
            Path(args.dump_trajectory).write_text(rec.to_csv(), encoding="utf-8")
        emp = empirical_W_and_returns(rec, aux.W, min_regenerations=1)
        out = {"graph": g.name, "p": aux.p, "regenerations": emp.regenerations,
               "max_row_tv": float(emp.row_tv.max()), "orientation_pvalue": emp.orientation_pvalue,
               "x_returns": emp.x_returns, "q_returns": emp.q_returns,
               "symmetric": aux.symmetric, "reversible": aux.reversible}
        _emit(dumps(out), cfg.output)
    else:
        _emit(write_kernel(aux.W), cfg.output)
    return EXIT_OK if aux.reversible else EXIT_FAIL


# ---------------------------------------------------------------- abelian


def cmd_abelian(args) -> int:
    from .cayley import (CayleySpec, alpha_auxiliary, cayley_graph, induced_alpha_kernels, negation_invariance,
                         verify_alpha_symmetry)
    from .serialize import parse_element

    factors = _ints(args.factors)
    if args.generators:
        gens = tuple(parse_element(t) for t in args.generators.split(";"))
        spec = CayleySpec(tuple(factors), gens)
    else:
        spec = CayleySpec.standard(*factors)
    cg = cayley_graph(spec)
    s = tuple(_ints(args.s)) if args.s else spec.generators[-1]
    modes = ("edge", "vertex") if args.mode == "both" else (args.mode,)
    out, ok = [], True
    for k in args.k:
        kernels = induced_alpha_kernels(cg, s, k, modes)
        for mode, (PA, fam, P) in kernels.items():
            rep = verify_alpha_symmetry(PA, fam, mode).to_dict()
            neg = negation_invariance(P, cg)
            aux = alpha_auxiliary(PA)
            rep["details"]["negation_on_paths"] = len(neg) == 0
            rep["details"]["W_symmetric"] = aux.symmetric
            if neg or not aux.symmetric:
                rep["status"] = "fail"
            ok &= rep["status"] == "pass"
            out.append(rep)
    _drop_timings(out, args.timings)
    _emit(dumps({"reports": out, "provenance": provenance({"factors": factors, "s": s}, None)}), args.out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- cover


def cmd_cover(args) -> int:
    from .cover import regeneration_samples, success_statistics, tau_tail

    cfg = _config_from_args(args)
    g = _load_graph(cfg)
    seed = int(seed_sequence(cfg.seed, "cover").generate_state(1)[0])
    succ, incs, rays = regeneration_samples(g, args.root, args.regenerations, seed=seed)
    rate, se = success_statistics(succ)
    tail = tau_tail(incs, min_samples=1)
    head = "regenerations,success_rate,stderr,slope,intercept,r2,lag1,lag1_sigma,mean_increment"
    row = (f"{len(succ)},{rate:.8g},{se:.8g},{tail.slope:.8g},{tail.intercept:.8g},{tail.r2:.8g},"
           f"{tail.lag1:.8g},{tail.lag1_sigma:.8g},{tail.mean:.8g}")
    _emit(head + "\n" + row + "\n", cfg.output)
    if args.rays:
        Path(args.rays).write_text("".join(" ".join(map(str, r[:50])) + "\n" for r in rays), encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------- orient / conditions


def cmd_orient(args) -> int:
    from .orientation import OrientationInfeasible, sink_free_source_free_orientation

    cfg = _config_from_args(args)
    g = _load_graph(cfg)
    try:
        f = sink_free_source_free_orientation(g, args.strategy)
    except OrientationInfeasible as exc:
        sys.stderr.write(dumps({"status": "infeasible", "reason": str(exc), "certificate": exc.certificate}))
        return EXIT_FAIL
    _emit(f.lines(), cfg.output)
    return EXIT_OK


def cmd_conditions(args) -> int:
    cfg = _config_from_args(args)
    g = _load_graph(cfg)
    out = []
    for which in args.which.split(","):
        rep = check_structural_condition(g, which, L=args.L, R=args.R, k=cfg.walk.k)
        out.append(asdict(rep))
    _emit(dumps({"graph": g.name, "conditions": out}), cfg.output)
    return EXIT_OK if all(r["holds"] for r in out) else EXIT_FAIL


# ---------------------------------------------------------------- report


def _leaves(x, prefix=""):
    if isinstance(x, dict):
        for k in sorted(x):
            yield from _leaves(x[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(x, list):
        for i, v in enumerate(x):
            yield from _leaves(v, f"{prefix}[{i}]")
    elif isinstance(x, (int, float)) and not isinstance(x, bool):
        yield prefix, x


def cmd_report(args) -> int:
    if not args.inputs:
        raise ConfigError("no input reports given", "inputs")
    merged = {}
    for path in args.inputs:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"{path} does not exist", "inputs")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, f"{path}: line {exc.lineno}") from None
        if not isinstance(data, dict):
            raise ConfigError("report must be a JSON object", path)
        key = p.stem
        i = 1
        while key in merged:
            i += 1
            key = f"{p.stem}#{i}"
        merged[key] = data
    out = {"reports": merged, "provenance": provenance({"inputs": [Path(x).name for x in args.inputs]}, None)}
    _emit(dumps(out), args.out)
    if args.csv:
        Path(args.csv).write_text("key,value\n" + "".join(f"{k},{v}\n" for k, v in _leaves(merged)),
                                  encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nbwalk", description="Non-backtracking walk identities and experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identities", help="exact identity suites")
    _add_graph(p)
    p.add_argument("--walk", choices=("nbrw", "knbrw"), default=None)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--timings", action="store_true", help="record wall-clock times in the report")
    p.add_argument("--suite", action="append",
                   choices=("all", "stationarity", "trajectory", "kernel", "multiset", "aux", "vertex-witness"))
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("walk", help="Monte Carlo returns before leaving a box")
    p.add_argument("--walk", choices=("srw", "nbrw"), default="srw")
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--sizes", type=_ints, default=[16, 32, 64])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--steps", dest="horizon", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("capacity", help="capacity exhaustion sweeps")
    p.add_argument("--experiment", choices=("box", "subdivision"), default="box")
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--sizes", type=_ints, default=[8, 16, 32])
    p.add_argument("--walks", type=lambda s: s.split(","), default=["srw", "nbrw_sym", "W"])
    p.add_argument("--p", default="1/2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("aux", help="auxiliary class chain: exact kernel or coupled sampling")
    _add_graph(p)
    p.add_argument("--steps", type=int, default=0)
    p.add_argument("--dump-trajectory")
    p.set_defaults(func=cmd_aux)

    p = sub.add_parser("abelian", help="straight-path family on abelian Cayley graphs")
    p.add_argument("--factors", default="5,5")
    p.add_argument("--generators", default=None, help="';'-separated elements like (1,0);(4,0)")
    p.add_argument("--s", default=None)
    p.add_argument("--k", type=_ints, default=[1, 2])
    p.add_argument("--mode", choices=("edge", "vertex", "both"), default="both")
    p.add_argument("--timings", action="store_true", help="record wall-clock times in the report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_abelian)

    p = sub.add_parser("cover", help="cover-tree coupling statistics")
    _add_graph(p)
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--regenerations", type=int, default=100_000)
    p.add_argument("--rays")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("orient", help="sink-free source-free orientation")
    _add_graph(p)
    p.add_argument("--strategy", choices=("flow", "absorption"), default="flow")
    p.set_defaults(func=cmd_orient)

    p = sub.add_parser("conditions", help="structural conditions")
    _add_graph(p)
    p.add_argument("--which", default="1,2")
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--R", type=int, default=None)
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("report", help="merge JSON reports")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except KernelError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
