import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbwalk.config import ConfigError, ExperimentConfig, load_config, parse_config, replica_rngs, seed_sequence
from nbwalk.graphs import bowtie, complete
from nbwalk.kernels import KernelError, Measure
from nbwalk.serialize import (
    dumps, format_element, format_label, parse_element, parse_label, provenance, read_flow, read_kernel,
    read_measure, write_flow, write_kernel, write_measure,
)
from nbwalk.stationary import pi_ke_measure
from nbwalk.walks import knbrw_kernel, pbrw_kernel

labels = st.one_of(
    st.integers(0, 10**6),
    st.tuples(st.integers(0, 99), st.integers(0, 99), st.integers(0, 99)),
    st.tuples(st.tuples(st.integers(0, 9), st.integers(0, 9)), st.tuples(st.integers(0, 9), st.integers(0, 9))),
)


@given(labels)
def test_label_roundtrip(lab):
    assert parse_label(format_label(lab)) == lab


@pytest.mark.parametrize("P", [
    pbrw_kernel(complete(4), Fraction(1, 3)),
    pbrw_kernel(complete(4), 0.25),
    knbrw_kernel(bowtie(), 2, "edge")[0],
], ids=["exact", "float", "window"])
def test_kernel_roundtrip(P):
    Q = read_kernel(write_kernel(P))
    assert list(Q.space) == list(P.space) and Q.rows == P.rows


def test_kernel_read_reports_line():
    with pytest.raises(KernelError, match="line 3"):
        read_kernel("# nbwalk-kernel\nstate 0 0\n0 zero 1\n")


def test_measure_roundtrip():
    g = bowtie()
    P, _ = knbrw_kernel(g, 2, "edge")
    pi = pi_ke_measure(g, P.space)
    back = read_measure(write_measure(pi))
    assert back.weights == pi.weights and list(back.space) == list(pi.space)
    assert read_measure(write_measure(Measure(back.space, tuple(float(w) for w in pi.weights)))).weights[0] == float(pi.weights[0])


@given(st.dictionaries(
    st.tuples(st.integers(0, 9), st.integers(0, 9)),
    st.dictionaries(st.lists(st.integers(0, 9), min_size=2, max_size=6).map(tuple),
                    st.fractions(0, 1, max_denominator=50), min_size=1, max_size=3),
    max_size=5))
def test_flow_roundtrip(paths):
    assert read_flow(write_flow(paths)) == paths


def test_flow_read_reports_line():
    with pytest.raises(ValueError, match="line 2"):
        read_flow("0 1 | 0 1 | 1\n0 1 | 0 x | 1\n")


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=4))
def test_element_roundtrip(x):
    assert parse_element(format_element(x)) == tuple(x)


def test_element_syntax():
    with pytest.raises(ValueError):
        parse_element("1,0")


def test_dumps_is_canonical():
    a = dumps({"b": Fraction(1, 3), "a": np.int64(2), (0, 1): float("inf")})
    assert json.loads(a) == {"a": 2, "b": "1/3", "0,1": "inf"}
    assert a == dumps({(0, 1): float("inf"), "a": 2, "b": Fraction(1, 3)})


def test_provenance_has_no_clock():
    assert provenance({"x": 1}, 3) == provenance({"x": 1}, 3)
    assert provenance({"x": 1}, 3)["config_sha256"] != provenance({"x": 2}, 3)["config_sha256"]


GOOD = {"graph": {"generator": "complete", "params": {"n": 4}}, "walk": {"kind": "knbrw", "k": 2}}


def test_config_defaults_and_roundtrip():
    cfg = parse_config(json.dumps(GOOD))
    assert cfg.walk.mode == "edge" and cfg.seed == 0 and cfg.schema == "nbwalk-config/1"
    assert parse_config(json.dumps(cfg.to_dict())) == cfg
    assert isinstance(cfg, ExperimentConfig)


def test_config_syntax_error_names_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('{\n  "seed": 1,\n  "walk": {,}\n}')
    assert exc.value.where == "line 3"


@pytest.mark.parametrize("patch, where", [
    ({"graph": {"generator": "complete", "colour": 1}}, "graph"),
    ({"walk": {"kind": "lazy"}}, "walk.kind"),
    ({"walk": {"kind": "knbrw", "mode": "face"}}, "walk.mode"),
    ({"walk": {"kind": "knbrw", "k": 0}}, "walk.k"),
    ({"caps": {"states": -1}}, "caps.states"),
    ({"seed": -5}, "seed"),
    ({"format": "xml"}, "format"),
    ({"schema": "nbwalk-config/0"}, "schema"),
    ({"extra": True}, "extra"),
    ({"graph": {"file": "missing.txt"}}, "graph.file"),
    ({"graph": {}}, "graph"),
])
def test_config_errors_name_the_field(patch, where):
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps({**GOOD, **patch}))
    assert exc.value.where == where


def test_config_file_relative_graph(tmp_path):
    (tmp_path / "g.txt").write_text("0 1\n1 2\n2 0\n")
    (tmp_path / "c.json").write_text(json.dumps({"graph": {"file": "g.txt"}}))
    assert load_config(tmp_path / "c.json").graph.file == "g.txt"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_seed_streams_are_deterministic_and_distinct():
    a = seed_sequence(7, "cover").generate_state(4)
    assert (a == seed_sequence(7, "cover").generate_state(4)).all()
    assert not (a == seed_sequence(7, "walk").generate_state(4)).all()
    r1, r2 = replica_rngs(7, "walk", 2)
    assert r1.random() != r2.random()
    assert replica_rngs(7, "walk", 2)[0].random() == replica_rngs(7, "walk", 2)[0].random()
