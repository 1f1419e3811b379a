import math

import numpy as np
import pytest
from conftest import bfs_distances, connected_graphs, delta_by_definition, slim_by_enumeration
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hypb.errors import CapExceeded, InputError
from hypb.metric_core import (
    FiniteMetricSpace,
    WeightedGraph,
    alpha_limit_check,
    bourdon_alpha,
    comb_graph,
    cycle_graph,
    disk_point,
    equiradial_decomposition,
    four_point_delta,
    four_point_delta_estimate,
    geodesic_count,
    geodesics,
    graph_metric,
    grid_graph,
    gromov_product,
    gromov_vs_geodesic_distance_check,
    hyperbolic_distance,
    mobius_from_origin,
    mobius_to_origin,
    path_graph,
    point_along_ray,
    random_tree,
    slim_triangle_delta,
    star_graph,
)


# --- finite metrics --------------------------------------------------------


def test_metric_validation_rejects_bad_matrices():
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "b"], [[0, 1], [2, 0]])
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "a"], [[0, 1], [1, 0]])
    with pytest.raises(InputError):
        FiniteMetricSpace(["a", "b"], [[0, 0], [0, 0]])


def test_disconnected_graph_is_an_input_error():
    with pytest.raises(InputError):
        graph_metric(WeightedGraph.from_edges([(0, 1)], vertices=[0, 1, 2]))


@given(connected_graphs(max_n=9))
def test_graph_metric_matches_bfs(g):
    assert np.array_equal(graph_metric(g).dist, bfs_distances(g))


def test_grid_metric_is_manhattan():
    m = graph_metric(grid_graph(4, 5))
    for (a, b) in [((0, 0), (3, 4)), ((1, 2), (2, 0))]:
        assert m.d(a, b) == abs(a[0] - b[0]) + abs(a[1] - b[1])


# --- Gromov products ----------------------------------------------------------


@given(connected_graphs(min_n=3, weighted=True), st.data())
def test_gromov_product_basepoint_inequality(g, data):
    m = graph_metric(g)
    pts = m.points
    x, y, p, q = (data.draw(st.sampled_from(pts)) for _ in range(4))
    assert abs(gromov_product(m, x, y, p) - gromov_product(m, x, y, q)) <= m.d(p, q) + 1e-12
    assert 0 <= gromov_product(m, x, y, p) <= min(m.d(p, x), m.d(p, y)) + 1e-12


def test_comb_products_and_equiradial_example():
    m = graph_metric(comb_graph(4))
    assert gromov_product(m, "x2", "x2'", "p") == 2
    assert gromov_product(m, "x1", "x3", "p") == 1
    assert equiradial_decomposition(m, "p", "x2", "x2'") == (2, 1, 0)


@given(connected_graphs(min_n=3, weighted=True), st.data())
def test_equiradial_decomposition_reassembles_distances(g, data):
    m = graph_metric(g)
    p, x, y = data.draw(st.permutations(m.points))[:3]
    from_p, from_y, from_x = equiradial_decomposition(m, p, x, y)
    assert min(from_p, from_y, from_x) >= -1e-12
    assert math.isclose(from_p + from_x, m.d(p, x), abs_tol=1e-9)
    assert math.isclose(from_p + from_y, m.d(p, y), abs_tol=1e-9)
    assert math.isclose(from_x + from_y, m.d(x, y), abs_tol=1e-9)


# --- four-point delta ------------------------------------------------------


@given(connected_graphs(max_n=7, weighted=True))
def test_four_point_delta_matches_definition(g):
    m = graph_metric(g)
    assert four_point_delta(m) == pytest.approx(delta_by_definition(m.dist), abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_grid_delta(n):
    assert four_point_delta(graph_metric(grid_graph(n))) == n - 1


def test_tree_delta_zero_and_cycle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        assert four_point_delta(graph_metric(random_tree(40, rng, max_length=7))) == 0
    assert four_point_delta(graph_metric(cycle_graph(6))) == 1


def test_four_point_cap_and_estimate():
    m = graph_metric(path_graph(30))
    with pytest.raises(CapExceeded):
        four_point_delta(m, max_points=10)
    g = graph_metric(grid_graph(5))
    est = four_point_delta_estimate(g, samples=20_000, seed=1)
    assert 0 <= est <= four_point_delta(g)
    assert est == four_point_delta_estimate(g, samples=20_000, seed=1)


# --- slim triangles ----------------------------------------------------------


@given(connected_graphs(max_n=7))
def test_slim_delta_matches_enumeration(g):
    assert slim_triangle_delta(g) == slim_by_enumeration(g)


@pytest.mark.parametrize("n,expected", [(3, 2), (4, 3)])
def test_grid_slim(n, expected):
    assert slim_triangle_delta(grid_graph(n)) == expected


@given(connected_graphs(min_n=2, max_n=9))
def test_relation_lemma_on_random_graphs(g):
    fp = four_point_delta(graph_metric(g))
    sl = slim_triangle_delta(g)
    assert fp <= 4 * sl + 1
    assert sl <= 6 * fp + 1


def test_geodesic_enumeration_and_cap():
    g = grid_graph(3)
    assert geodesic_count(g, (0, 0), (2, 2)) == 6
    assert len(geodesics(g, (0, 0), (2, 2))) == 6
    with pytest.raises(CapExceeded):
        geodesics(g, (0, 0), (2, 2), cap=5)
    with pytest.raises(CapExceeded):
        slim_triangle_delta(grid_graph(6), cap=10)
    with pytest.raises(InputError):
        slim_triangle_delta(star_graph(3, length=2))


def test_gromov_vs_geodesic_on_tree_is_exact():
    g = comb_graph(4)
    chk = gromov_vs_geodesic_distance_check(g, "p", "x3'", "x2'")
    assert chk.gap == 0 and chk.product == 2


# --- disk model ------------------------------------------------------------------


def _segment_length(z, w):
    f = lambda s: 2 * abs(w - z) / (1 - abs(z + s * (w - z)) ** 2)  # noqa: E731
    return quad(f, 0, 1, epsabs=1e-13, epsrel=1e-13)[0]


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95), st.floats(0, 2 * math.pi))
def test_distance_along_a_diameter_matches_integral(r1, r2, th):
    u = complex(math.cos(th), math.sin(th))
    z, w = r1 * u, r2 * u
    assert hyperbolic_distance(z, w) == pytest.approx(_segment_length(z, w), rel=1e-9, abs=1e-12)


@given(st.complex_numbers(max_magnitude=0.9), st.complex_numbers(max_magnitude=0.9), st.complex_numbers(max_magnitude=0.9))
def test_distance_is_below_euclidean_path_and_mobius_invariant(p, z, w):
    d = hyperbolic_distance(z, w)
    assert d <= _segment_length(z, w) * (1 + 1e-9) + 1e-12
    d2 = hyperbolic_distance(mobius_to_origin(p, z), mobius_to_origin(p, w))
    assert d2 == pytest.approx(d, rel=1e-7, abs=1e-9)
    assert mobius_from_origin(p, mobius_to_origin(p, z)) == pytest.approx(z, abs=1e-12)


def test_disk_point_rejects_outside():
    with pytest.raises(InputError):
        disk_point(1.0)
    with pytest.raises(InputError):
        disk_point((0.8, 0.8))


@given(st.complex_numbers(max_magnitude=0.8), st.floats(0.1, 4), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_alpha_equals_half_angle_sine(p, t, th1, th2):
    """On a sphere about p, alpha_p is sin of half the angle at p (angles read after moving p to 0)."""
    y1, y2 = point_along_ray(p, th1, t), point_along_ray(p, th2, t)
    a1, a2 = mobius_to_origin(p, y1), mobius_to_origin(p, y2)
    angle = abs(math.remainder(math.atan2(a1.imag, a1.real) - math.atan2(a2.imag, a2.real), 2 * math.pi))
    assert bourdon_alpha(p, y1, y2) == pytest.approx(math.sin(angle / 2), abs=1e-7)


def test_alpha_extremes_and_limit():
    assert bourdon_alpha(0, 0.5, -0.5) == pytest.approx(1.0)
    assert bourdon_alpha(0, 0.5, 0.5) == 0.0
    with pytest.raises(InputError):
        bourdon_alpha(0, 0, 0.5)
    gaps = [alpha_limit_check(0, 0.0, math.pi / 2, t).gap for t in (2, 4, 6, 8, 10)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3
    assert alpha_limit_check(0, 1.0, 1.0, 5).gap == 0
