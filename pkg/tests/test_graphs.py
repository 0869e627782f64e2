import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbwalk.graphs import (
    GraphError, ball_and_distance, bowtie, build_graph, check_structural_condition, complete,
    components, cycle, generate, girth, grid_box, parse_graph_text, path, random_even_graph,
    random_min_degree_two, random_tree, star, subdivide_transient_example, torus, two_paths,
    write_graph_text,
)


def test_triangle_from_edge_list():
    g = build_graph([(0, 1), (1, 2), (2, 0)])
    assert g.n == 3 and g.degrees == (2, 2, 2)


def test_duplicate_edge_rejected():
    with pytest.raises(GraphError, match="duplicate"):
        build_graph([(0, 1), (1, 0)])


def test_empty_edge_list_rejected():
    with pytest.raises(GraphError):
        build_graph([])


def test_loop_counts_once_in_degree():
    g = build_graph([(0, 0), (0, 1)])
    assert g.has_loops()
    assert g.degree(0) == 2 and g.degree(1) == 1


@pytest.mark.parametrize("g, n, m, degs", [
    (complete(4), 4, 6, {3}),
    (torus(2, 5), 25, 50, {4}),
])
def test_generator_counts(g, n, m, degs):
    assert g.n == n and len(g.edges) == m and set(g.degrees) == degs


def test_bowtie_degrees():
    assert bowtie().degrees == (2, 2, 4, 2, 2)


def test_regular_tree_needs_degree_three():
    with pytest.raises(GraphError):
        generate("tree", d=2, h=3)


def test_ball_examples():
    ball, dist = ball_and_distance(cycle(6), 0, 1)
    assert ball == {5, 0, 1}
    ball, _ = ball_and_distance(complete(4), 2, 1)
    assert ball == {0, 1, 2, 3}
    _, dist = ball_and_distance(path(4), 0, 3)
    assert dist[3] == 3


def test_girth_examples():
    assert girth(cycle(5)) == 5
    assert girth(random_tree(12, np.random.default_rng(0))) == math.inf
    assert girth(complete(4)) == 3


@given(st.integers(0, 2**32 - 1), st.integers(4, 14))
def test_girth_matches_networkx(seed, n):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    ref = min((len(c) for c in nx.minimum_cycle_basis(g.to_networkx())), default=math.inf)
    assert girth(g) == ref


@given(st.integers(0, 2**32 - 1), st.integers(3, 20))
def test_distances_match_networkx(seed, n):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    ref = nx.single_source_shortest_path_length(g.to_networkx(), 0)
    _, dist = ball_and_distance(g, 0, n)
    assert dist == ref


def test_condition_two_examples():
    assert check_structural_condition(cycle(6), "2", R=3).holds
    rep = check_structural_condition(path(50), "2", R=3)
    assert not rep.holds and rep.witness is not None


def test_condition_four_on_k4():
    assert check_structural_condition(complete(4), "4ke", R=1, k=3).holds


def test_condition_one_measures_two_paths():
    # a 6-cycle with one chord: two 2-paths of length 3 (and 3) between the chord ends
    g = build_graph([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)])
    rep = check_structural_condition(g, "1")
    assert rep.value == 3
    assert not check_structural_condition(g, "1", L=2).holds


def test_two_paths_internal_degree_two():
    g = bowtie()
    for p in two_paths(g):
        assert all(g.degree(v) == 2 for v in p[1:-1])


def test_subdivide_star():
    sub = subdivide_transient_example(star(3), 0)
    assert sub.shell_sizes == [3]
    assert sub.graph.n == 4 + 3 * 2
    assert len(sub.graph.edges) == 9


def test_subdivide_short_path_unchanged():
    sub = subdivide_transient_example(path(3), 0)
    assert sub.shell_sizes == [1, 1]
    assert sub.graph.edges == path(3).edges


def test_subdivide_vertex_count_in_3d_box():
    h = grid_box(3, 4)
    corner = 0
    sub = subdivide_transient_example(h, corner)
    # oracle: shell sizes from a plain BFS
    dist = nx.single_source_shortest_path_length(h.to_networkx(), corner)
    sizes = {}
    for u, v in h.edges:
        if abs(dist[u] - dist[v]) == 1:
            n = max(dist[u], dist[v])
            sizes[n] = sizes.get(n, 0) + 1
    assert all(s > 0 for s in sub.shell_sizes)
    assert sub.shell_sizes == [sizes[n] for n in sorted(sizes)]
    assert sub.graph.n == h.n + sum(s * (s - 1) for s in sub.shell_sizes)


@given(st.integers(0, 2**32 - 1), st.integers(3, 12))
def test_subdivision_preserves_connectivity(seed, n):
    g = random_min_degree_two(n, np.random.default_rng(seed))
    sub = subdivide_transient_example(g, 0)
    assert len(components(sub.graph)) == len(components(g))


def test_graph_text_roundtrip_and_duplicate_line():
    g, N = parse_graph_text("# triangle\n0 1\n1 2 2/3\n2 0 0.5\n")
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    g2, N2 = parse_graph_text(write_graph_text(N))
    assert g2.edges == g.edges and dict(N2.conductance) == dict(N.conductance)
    with pytest.raises(GraphError, match="line 3"):
        parse_graph_text("0 1\n1 2\n2 1\n")


@given(st.integers(0, 2**32 - 1), st.integers(3, 16))
def test_random_even_graph_is_even(seed, n):
    g = random_even_graph(n, np.random.default_rng(seed))
    assert all(d % 2 == 0 for d in g.degrees) and g.is_connected()
