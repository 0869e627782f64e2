import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbwalk.graphs import (
    bowtie, build_graph, complete, cycle, dumbbell, path, random_min_degree_two, random_tree, star,
    subdivide_transient_example,
)
from nbwalk.orientation import (
    Orientation, OrientationInfeasible, RoughMapChecker, VertexMap, line_graph_head_map, quasi_inverse,
    reversal_distance_bound, rough_map_check, sink_free_source_free_orientation, verify_orientation,
)


def _degrees(g, f):
    indeg, outdeg = [0] * g.n, [0] * g.n
    for a, b in f.choice.values():
        outdeg[a] += 1
        indeg[b] += 1
    return indeg, outdeg


@pytest.mark.parametrize("strategy", ["flow", "absorption"])
def test_c4_is_oriented_cyclically(strategy):
    g = cycle(4)
    f = sink_free_source_free_orientation(g, strategy)
    assert verify_orientation(g, f)
    assert _degrees(g, f) == ([1] * 4, [1] * 4)


@pytest.mark.parametrize("strategy", ["flow", "absorption"])
def test_bowtie_centre_balanced(strategy):
    g = bowtie()
    f = sink_free_source_free_orientation(g, strategy)
    indeg, outdeg = _degrees(g, f)
    assert verify_orientation(g, f) and indeg[2] == outdeg[2] == 2


def test_path_is_infeasible_with_certificate():
    with pytest.raises(OrientationInfeasible) as exc:
        sink_free_source_free_orientation(path(3))
    assert exc.value.certificate["reason"] == "vertex of degree < 2"


def test_verify_examples():
    g = cycle(4)
    assert verify_orientation(g, Orientation({(0, 1): (0, 1), (1, 2): (1, 2), (2, 3): (2, 3), (0, 3): (3, 0)}))
    s = star(3)
    assert not verify_orientation(s, Orientation({e: e for e in s.edges}))


def test_exactly_two_of_eight_triangle_orientations_are_valid():
    g = cycle(3)
    valid = 0
    for flips in itertools.product([False, True], repeat=3):
        choice = {e: (e[::-1] if fl else e) for e, fl in zip(g.edges, flips)}
        valid += verify_orientation(g, Orientation(choice))
    assert valid == 2


@given(st.integers(0, 2**32 - 1), st.integers(3, 40), st.sampled_from(["flow", "absorption"]))
def test_every_solver_output_verifies(seed, n, strategy):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    f = sink_free_source_free_orientation(g, strategy)
    assert verify_orientation(g, f)
    LG, head = line_graph_head_map(g, f)
    assert RoughMapChecker(LG, g, head).check(2, "isometry").valid


@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_trees_are_rejected(seed, n):
    with pytest.raises(OrientationInfeasible):
        sink_free_source_free_orientation(random_tree(n, np.random.default_rng(seed)), "flow")


def test_identity_is_isometry():
    g = complete(5)
    assert rough_map_check(VertexMap(g, g, tuple(range(g.n))), 1, "isometry").valid


def test_subdivided_endpoints_fail_small_constant():
    h = star(3)
    sub = subdivide_transient_example(h, 0)
    f = [sub.original[v] for v in range(h.n)]
    chk = RoughMapChecker(h, sub.graph, f)
    assert not chk.check(1, "embedding").valid
    assert chk.minimal_K("embedding") > 1


@given(st.integers(0, 2**32 - 1), st.integers(3, 14), st.integers(1, 5))
def test_validity_is_monotone_in_K(seed, n, K):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    rng = np.random.default_rng(seed + 1)
    f = rng.integers(0, g.n, g.n)
    chk = RoughMapChecker(g, g, f)
    for mode in ("embedding", "isometry"):
        if chk.check(K, mode).valid:
            assert chk.check(K + 1, mode).valid


@given(st.integers(0, 2**32 - 1), st.integers(3, 20))
def test_composition_and_quasi_inverse(seed, n):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    f = sink_free_source_free_orientation(g)
    LG, head = line_graph_head_map(g, f)
    back = quasi_inverse(LG, g, head)
    K1 = RoughMapChecker(LG, g, head).minimal_K("isometry")
    K2 = RoughMapChecker(g, LG, back).minimal_K("isometry")
    assert math.isfinite(K2)
    comp = [back[h] for h in head]
    assert RoughMapChecker(LG, LG, comp).check(K1 * K2 + K1 + K2, "isometry").valid


def test_reversal_distance_examples():
    assert reversal_distance_bound(complete(4), 1, "edge") == 3
    assert reversal_distance_bound(cycle(3), 1, "edge") == math.inf


def test_reversal_distance_grows_with_bridge_length():
    vals = [reversal_distance_bound(dumbbell(L), 1, "edge") for L in (2, 4, 8)]
    assert vals[0] < vals[1] < vals[2]


def test_orientation_lines_roundtrip():
    g = build_graph([(0, 1), (1, 2), (2, 0)])
    f = sink_free_source_free_orientation(g)
    lines = f.lines().splitlines()
    assert len(lines) == 3 and all(len(l.split()) == 2 for l in lines)
