"""Text formats for kernels, measures, flows, orientations and group elements; JSON helpers."""

from __future__ import annotations

import hashlib
import json
import math
import platform
from fractions import Fraction
from typing import Any

import numpy as np

from .kernels import Kernel, KernelError, Measure, StateSpace

KERNEL_MAGIC = "# nbwalk-kernel"
MEASURE_MAGIC = "# nbwalk-measure"


def format_label(label) -> str:
    """``3`` -> ``3``; ``(0, 1, 2)`` -> ``0,1,2``; ``((0, 1), (1, 0))`` -> ``0,1;1,0``."""
    if isinstance(label, (int, np.integer)):
        return str(int(label))
    if isinstance(label, tuple) and label and all(isinstance(x, tuple) for x in label):
        return ";".join(format_label(x) for x in label)
    if isinstance(label, tuple):
        return ",".join(str(int(x)) for x in label)
    raise KernelError(f"cannot serialise label {label!r}")


def parse_label(text: str):
    text = text.strip()
    if ";" in text:
        return tuple(parse_label(t) for t in text.split(";"))
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return int(text)


def _num(v) -> str:
    return str(v) if isinstance(v, (int, Fraction)) else repr(float(v))


def _parse_num(tok: str):
    return Fraction(tok) if ("/" in tok or "." not in tok and "e" not in tok.lower()) else float(tok)


def write_kernel(P: Kernel) -> str:
    """Header with one ``state i label`` line per state, then ``row col value`` triplets."""
    lines = [KERNEL_MAGIC, f"# states {len(P)}"]
    lines += [f"state {i} {format_label(lab)}" for i, lab in enumerate(P.space)]
    for i, r in enumerate(P.rows):
        for j in sorted(r):
            lines.append(f"{i} {j} {_num(r[j])}")
    return "\n".join(lines) + "\n"


def read_kernel(text: str) -> Kernel:
    labels: dict[int, Any] = {}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        try:
            if toks[0] == "state":
                labels[int(toks[1])] = parse_label(toks[2])
            else:
                entries.append((int(toks[0]), int(toks[1]), _parse_num(toks[2])))
        except (ValueError, IndexError, ZeroDivisionError) as exc:
            raise KernelError(f"line {lineno}: {exc}") from None
    n = len(labels)
    if sorted(labels) != list(range(n)):
        raise KernelError("state indices must be 0..n-1")
    space = StateSpace([labels[i] for i in range(n)])
    rows: list[dict] = [{} for _ in range(n)]
    for i, j, v in entries:
        rows[i][j] = v
    return Kernel(space, rows)


def write_measure(pi: Measure) -> str:
    return MEASURE_MAGIC + "\n" + "".join(f"{format_label(lab)} {_num(w)}\n" for lab, w in zip(pi.space, pi.weights))


def read_measure(text: str) -> Measure:
    labs, ws = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            lab, w = line.split()
            labs.append(parse_label(lab))
            ws.append(_parse_num(w))
        except (ValueError, ZeroDivisionError) as exc:
            raise KernelError(f"line {lineno}: {exc}") from None
    return Measure(StateSpace(labs), tuple(ws))


def write_flow(paths: dict) -> str:
    """``x y | v0 v1 ... | weight`` per route, target edges in sorted order."""
    out = []
    for (x, y) in sorted(paths):
        for gamma in sorted(paths[(x, y)]):
            w = paths[(x, y)][gamma]
            out.append(f"{x} {y} | {' '.join(map(str, gamma))} | {_num(w)}")
    return "\n".join(out) + "\n"


def read_flow(text: str) -> dict:
    paths: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            head, route, w = (t.strip() for t in raw.split("|"))
            x, y = (int(t) for t in head.split())
            gamma = tuple(int(t) for t in route.split())
            paths.setdefault((x, y), {})[gamma] = _parse_num(w)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return paths


def format_element(x) -> str:
    return "(" + ",".join(str(int(a)) for a in x) + ")"


def parse_element(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"group element must look like (c1,...,cr): {text!r}")
    return tuple(int(t) for t in text[1:-1].split(",") if t.strip())


# ---------------------------------------------------------------- JSON


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else format_label(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def provenance(config: dict | None = None, seed: int | None = None) -> dict:
    """Versions, seed and a hash of the configuration (no timestamps, so re-runs are identical)."""
    import networkx
    import scipy

    from . import __version__

    cfg = json.dumps(jsonable(config or {}), sort_keys=True)
    return {
        "nbwalk": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "networkx": networkx.__version__,
        "seed": seed,
        "config_sha256": hashlib.sha256(cfg.encode()).hexdigest(),
    }
