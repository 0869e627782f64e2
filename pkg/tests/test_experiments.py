import numpy as np
import pytest

from nbwalk.experiments import (
    CAPACITY_HEADER, RETURN_HEADER, SUBDIVISION_HEADER, box_capacity, box_sweep, corner_ball,
    monotone_decreasing, relative_change, returns_before_exit, subdivision_row,
)
from nbwalk.graphs import box_center, grid_box

from oracles import dirichlet_capacity


def test_srw_box_capacity_against_dense_oracle():
    g = grid_box(2, 7)
    C = np.zeros((g.n, g.n))
    for u, v in g.edges:
        C[u, v] = C[v, u] = 1.0
    ref = dirichlet_capacity(C, [box_center(2, 7)], sorted(g.boundary))
    assert box_capacity(2, 7, "srw") == pytest.approx(ref, rel=1e-10)


def test_two_dimensional_capacities_decrease():
    rows = box_sweep(2, [5, 9, 13], walks=("srw", "nbrw_sym"))
    for walk in ("srw", "nbrw_sym"):
        assert monotone_decreasing([r.capacity for r in rows if r.walk == walk])


def test_three_dimensional_capacity_flattens():
    caps = [box_capacity(3, L, "srw") for L in (5, 9, 13)]
    assert monotone_decreasing(caps)
    assert relative_change(caps[1], caps[2]) < relative_change(caps[0], caps[1])


def test_nonreversible_capacity_dominates_symmetrized():
    assert box_capacity(2, 7, "nbrw") >= box_capacity(2, 7, "nbrw_sym") - 1e-9


def test_corner_ball_distances():
    g, dist = corner_ball(2, 3)
    assert g.n == 10 and dist[0] == 0 and max(dist.values()) == 3


def test_subdivision_stays_bounded_below_by_nash_williams():
    prev = None
    for r in (2, 3, 4):
        row = subdivision_row(3, r)
        assert row.subdivided_capacity < row.base_capacity
        assert 1 / row.subdivided_capacity >= row.nash_williams_bound - 1e-9
        if prev is not None:
            assert row.subdivided_vertices > prev.subdivided_vertices
        prev = row
    assert row.csv().count(",") == SUBDIVISION_HEADER.count(",")


def _srw_returns_oracle(d, L):
    g = grid_box(d, L)
    inner = [v for v in range(g.n) if v not in g.boundary]
    pos = {v: i for i, v in enumerate(inner)}
    Q = np.zeros((len(inner), len(inner)))
    for v in inner:
        for w in g.adjacency[v]:
            if w in pos:
                Q[pos[v], pos[w]] += 1 / g.degree(v)
    G = np.linalg.inv(np.eye(len(inner)) - Q)
    return G[pos[box_center(d, L)], pos[box_center(d, L)]] - 1


def test_srw_returns_match_green_function():
    row = returns_before_exit(2, 9, "srw", 4000, np.random.default_rng(0))
    assert abs(row.mean_returns - _srw_returns_oracle(2, 9)) <= 4 * row.stderr


def test_nbrw_returns_fewer_than_srw():
    rng = np.random.default_rng(1)
    s = returns_before_exit(2, 15, "srw", 3000, rng)
    b = returns_before_exit(2, 15, "nbrw", 3000, rng)
    assert b.mean_returns < s.mean_returns
    assert s.csv().count(",") == RETURN_HEADER.count(",")


def test_box_sweep_rows_match_header():
    row = box_sweep(2, [5], walks=("W",))[0]
    assert row.capacity > 0 and row.csv().count(",") == CAPACITY_HEADER.count(",")
    with pytest.raises(ValueError):
        box_capacity(2, 5, "lazy")
