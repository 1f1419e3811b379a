import math

import numpy as np
import pytest
from conftest import euclid, euclidean_points, mst_bottleneck
from hypothesis import given
from hypothesis import strategies as st

from hypb.dimension import interval_metric
from hypb.errors import CertificateFailure, InputError
from hypb.metric_core import FiniteMetricSpace, WeightedGraph, graph_metric, gromov_product, star_graph
from hypb.qs_props import (
    SampledMap,
    annulus_distortion_check,
    bottleneck_matrix,
    bounded_image_bound,
    control_envelope,
    cross_ratio,
    doubling_constant_metric,
    ratio_samples,
    uniform_disconnection_constant,
    uniformly_perfect_constant,
)
from hypb.tree_boundary import T4, visual_metric_space


def space(X):
    return FiniteMetricSpace(list(range(len(X))), euclid(X))


def ident(m1, m2):
    return SampledMap(m1, m2, {i: i for i in m1.points})


def test_isometry_envelope_is_identity():
    X = np.random.default_rng(1).uniform(size=(8, 2))
    env = control_envelope(ident(space(X), space(X)))
    assert env.lam == pytest.approx(1.0) and env.alpha == 1.0


@given(euclidean_points(min_n=3, max_n=9), st.sampled_from([0.25, 0.5, 0.8]))
def test_snowflake_samples_follow_power(X, eps):
    m = space(X)
    f = ident(m, FiniteMetricSpace(m.points, m.dist**eps))
    S, _ = ratio_samples(f)
    assert np.allclose(S[:, 1], S[:, 0] ** eps, rtol=1e-12)
    env = control_envelope(f)
    assert env.dominates(S[:, 0], S[:, 1])


@given(euclidean_points(min_n=3, max_n=9), st.integers(0, 2**31 - 1))
def test_bilipschitz_domination_and_annulus(X, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    if abs(np.linalg.det(A)) < 0.1:
        return
    m, n = space(X), space(X @ A.T)
    f = ident(m, n)
    off = ~np.eye(len(X), dtype=bool)
    r = n.dist[off] / m.dist[off]
    K = max(r.max(), 1 / r.min())
    S, _ = ratio_samples(f)
    assert np.all(S[:, 1] <= K**2 * S[:, 0] * (1 + 1e-9))
    assert annulus_distortion_check(f, lambda t: K**2 * t).passed


@given(euclidean_points(min_n=3, max_n=8), st.sampled_from([0.3, 0.6]))
def test_composition_is_dominated_by_composed_envelopes(X, eps):
    m = space(X)
    Y = X + 0.2 * np.sin(3 * X)
    f1 = ident(m, space(Y))
    f2 = ident(f1.codomain, FiniteMetricSpace(f1.codomain.points, f1.codomain.dist**eps))
    phi, psi = control_envelope(f1), control_envelope(f2)
    S, _ = ratio_samples(f1.compose(f2))
    assert np.all(S[:, 1] <= psi(phi(S[:, 0])) * (1 + 1e-9))


def test_annulus_failure_has_witness():
    X = np.random.default_rng(2).uniform(size=(10, 2))
    Y = X.copy()
    Y[1] = Y[0] + 1e-7
    rep = annulus_distortion_check(ident(space(X), space(Y)), lambda t: 2 * t)
    assert not rep.passed
    w = rep.failures[0]
    assert w.r2_image / w.r1_image > w.allowed


def test_sampled_map_validation():
    m = interval_metric([0, 1, 2])
    with pytest.raises(InputError):
        SampledMap(m, m, {0: 0, 1: 0, 2: 2})
    with pytest.raises(InputError):
        SampledMap(m, interval_metric([0, 1]), {0: 0, 1: 1})
    with pytest.raises(InputError):
        control_envelope(SampledMap(interval_metric([0, 1]), interval_metric([0, 1]), {0: 0, 1: 1}))


def test_bounded_image():
    m = interval_metric(np.linspace(0, 1, 6))
    f = ident(m, m)
    assert bounded_image_bound(f, lambda t: t, [0, 2, 5]) == pytest.approx(2.0)
    with pytest.raises(InputError):
        bounded_image_bound(f, lambda t: t, [1])
    with pytest.raises(CertificateFailure):
        bounded_image_bound(f, lambda t: 0.1 * t, [0, 1, 5])


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 8))
def test_log_cross_ratio_is_bridge_length(a1, a2, a3, a4, L):
    """H-shaped tree: leaves z1, z2 hang from u, z3, z4 from v, |uv| = L; basepoint p off u."""
    edges = [("z1", "u", a1), ("z2", "u", a2), ("z3", "v", a3), ("z4", "v", a4), ("u", "v", L), ("p", "u", 1)]
    g = graph_metric(WeightedGraph.from_edges(edges))
    z = ["z1", "z2", "z3", "z4"]
    D = np.array([[0.0 if x == y else math.exp(-gromov_product(g, x, y, "p")) for y in z] for x in z])
    m = FiniteMetricSpace(z, D)
    assert math.log(cross_ratio(m, "z1", "z3", "z2", "z4")) == pytest.approx(-L, abs=1e-9)
    with pytest.raises(InputError):
        cross_ratio(m, "z1", "z1", "z2", "z4")


@given(euclidean_points(min_n=2, max_n=12))
def test_bottleneck_matches_spanning_tree(X):
    D = euclid(X)
    assert np.allclose(bottleneck_matrix(D), mst_bottleneck(D), rtol=0, atol=1e-12)


def test_uniform_constants_on_samples():
    grid = interval_metric(np.linspace(0, 1, 11))
    assert uniformly_perfect_constant(grid).c == pytest.approx(0.5)
    assert uniform_disconnection_constant(grid).delta == pytest.approx(0.1)
    two = interval_metric([0, 1])
    assert uniform_disconnection_constant(two).delta == 1
    assert uniformly_perfect_constant(two).degenerate
    cantor = interval_metric([sum(2 * b / 3 ** (i + 1) for i, b in enumerate(bits)) for bits in np.ndindex(*(2,) * 6)])
    assert 0.3 < uniform_disconnection_constant(cantor).delta < 0.4


def test_doubling_metric_tree_and_stars():
    assert doubling_constant_metric(visual_metric_space(T4, 5, 2.0)).C == 3
    counts = [doubling_constant_metric(graph_metric(star_graph(m)), exact_limit=0).C for m in (4, 8, 16)]
    assert counts == sorted(counts) and len(set(counts)) == 3
    exact = doubling_constant_metric(graph_metric(star_graph(6)))
    assert exact.exact and exact.C == 7
