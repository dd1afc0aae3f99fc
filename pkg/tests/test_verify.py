import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fivepoint.comparison import lss_all, simplex_minimum
from fivepoint.embed import embed_cone_disc, embed_doubled_polytope
from fivepoint.generators import four_tense_instance, shared_center_instance
from fivepoint.geometry import circle_distance, detour_via_segment, model_angle
from fivepoint.metric import metric_from_points
from fivepoint.verify import (
    FAMILIES,
    BadParams,
    PointOutsideV,
    doubling_distance,
    oracle_lss_grid,
    polygon_doubling_distance,
    random_convex_polygon,
    sample_metric,
    simplex_grid,
    surface_distance,
    surface_distances,
)


def test_model_angle():
    assert model_angle(1, 1, 1) == pytest.approx(np.pi / 3)
    assert model_angle(3, 4, 5) == pytest.approx(np.pi / 2)
    assert model_angle(1, 1, 2) == pytest.approx(np.pi)
    assert model_angle(1, 2, 1) == 0.0
    assert model_angle(0, 1, 1) == 0.0


def test_circle_distance():
    assert circle_distance(5, 0, 4) == 1
    assert circle_distance(5, 0.5, 3) == 2.5
    with pytest.raises(ValueError):
        circle_distance(0, 0, 1)


def test_detour_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b, o = rng.normal(size=(3, 3))
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        t0, t1 = sorted(rng.normal(size=2))
        ts = np.linspace(t0, t1, 20001)
        z = o + ts[:, None] * d
        brute = (np.linalg.norm(z - a, axis=1) + np.linalg.norm(z - b, axis=1)).min()
        assert detour_via_segment(a, b, o, d, t0, t1) == pytest.approx(brute, abs=1e-6)


def test_simplex_grid_size():
    assert len(simplex_grid(3, 10)) == 66
    assert np.allclose(simplex_grid(4, 20).sum(1), 1)


def test_grid_oracle_bounds_face_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(10):
        A = rng.normal(size=(4, 4))
        A = A + A.T
        assert simplex_minimum(A)[0] <= oracle_lss_grid(A, 50) + 1e-12
    with pytest.raises(BadParams):
        oracle_lss_grid(np.eye(2), 5)


def test_surface_distance_flat_disc_is_euclidean():
    th = 1.1
    u = np.array([np.cos(th), np.sin(th)])
    P = np.array([[0, 0], [-1, 0], [1.3, 0], 0.8 * u, -1.7 * u])
    m = metric_from_points(P, list("xabcd"))
    cert = embed_cone_disc(m, dict(zip(["x", "v1", "v2", "w1", "w2"], "xabcd")))
    assert surface_distance(cert, "a", "b") == pytest.approx(2.3)
    labs, D = surface_distances(cert)
    assert np.allclose(D, m.matrix, atol=1e-12)


def test_surface_distance_metric_axioms():
    rng = np.random.default_rng(3)
    for _ in range(3):
        m, roles = shared_center_instance(rng)
        _, D = surface_distances(embed_cone_disc(m, roles))
        assert np.abs(D - D.T).max() <= 1e-10
        for i, j, k in itertools.permutations(range(5), 3):
            assert D[i, k] <= D[i, j] + D[j, k] + 1e-10


def test_doubling_distance_properties():
    rng = np.random.default_rng(4)
    m, t = four_tense_instance(rng)
    cert = embed_doubled_polytope(m, t)
    pts = [cert.placement(x) for x in cert.labels]
    for a, b in itertools.combinations(pts, 2):
        d = doubling_distance(cert, a, b)
        assert d == pytest.approx(doubling_distance(cert, b, a), abs=1e-12)
        assert d >= np.linalg.norm(a[1] - b[1]) - 1e-12
    far = (1, 1e3 * np.ones(3))
    with pytest.raises(PointOutsideV):
        doubling_distance(cert, pts[0], far)


def test_polygon_doubling_simple_cases():
    # a point and its mirror image across an edge: the doubling distance is their chord
    poly = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    assert polygon_doubling_distance(poly, [1, 1], 0, [1, 1], 1) == pytest.approx(2.0)
    assert polygon_doubling_distance(poly, [1, 0.5], 0, [1, 1.5], 0) == pytest.approx(1.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_samples_satisfy_lss(family):
    for seed in range(20):
        m = sample_metric(family, seed=seed)
        assert lss_all(m).holds
    assert sample_metric(family, seed=7) == sample_metric(family, seed=7)


def test_sample_params():
    m = sample_metric("circle", {"length": 10.0}, seed=1)
    assert m.diameter <= 5.0 + 1e-12
    with pytest.raises(BadParams):
        sample_metric("sphere", {"radius": -1})
    with pytest.raises(BadParams):
        sample_metric("hyperbolic")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_polygon_doubling_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    poly = random_convex_polygon(rng, 5)
    pts = [(0.5 * poly[i] + 0.5 * poly[(i + 2) % 5] * rng.uniform(0, 1), int(rng.integers(2))) for i in range(4)]
    D = np.array([[polygon_doubling_distance(poly, a, sa, b, sb) for b, sb in pts] for a, sa in pts])
    assert np.abs(D - D.T).max() <= 1e-12
    for i, j, k in itertools.permutations(range(4), 3):
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-10
