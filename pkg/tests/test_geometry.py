import numpy as np
import pytest

from singletzoo.geometry import (
    DegenerateTangentError,
    coplanar,
    dot,
    fibonacci_sphere,
    geodesic_from,
    perp,
    sample_unit_sphere,
    sgn,
    unit,
)


def test_unit_normalizes_single_vector():
    v = unit([3.0, 0.0, 4.0])
    assert np.allclose(v, [0.6, 0.0, 0.8])
    assert abs(np.linalg.norm(v) - 1.0) < 1e-15


def test_unit_normalizes_batch():
    rng = np.random.default_rng(1)
    v = rng.normal(size=(50, 3))
    n = np.linalg.norm(unit(v), axis=1)
    assert np.allclose(n, 1.0, atol=1e-14)


def test_dot_last_axis():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([4.0, -5.0, 6.0])
    assert dot(a, b) == pytest.approx(12.0)
    batch = np.tile(a, (4, 1))
    assert dot(batch, b).shape == (4,)


def test_sgn_convention_at_zero():
    # the whole package leans on sgn(0) = +1
    assert sgn(0.0) == 1.0
    assert sgn(-0.0) == 1.0
    vals = sgn(np.array([-2.0, -1e-300, 0.0, 1e-300, 5.0]))
    assert vals.tolist() == [-1.0, -1.0, 1.0, 1.0, 1.0]


def test_sample_unit_sphere_scalar_and_batch():
    rng = np.random.default_rng(7)
    v = sample_unit_sphere(rng)
    assert v.shape == (3,)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    batch = sample_unit_sphere(rng, 1000)
    assert batch.shape == (1000, 3)
    assert np.allclose(np.linalg.norm(batch, axis=1), 1.0, atol=1e-12)


def test_sample_unit_sphere_is_uniform():
    # each coordinate of a uniform point has mean 0, variance 1/3
    rng = np.random.default_rng(123)
    v = sample_unit_sphere(rng, 200000)
    se = 1.0 / np.sqrt(3 * len(v))
    assert np.abs(v.mean(axis=0)).max() < 5 * se
    assert np.abs((v**2).mean(axis=0) - 1.0 / 3.0).max() < 5e-3


def test_sample_unit_sphere_deterministic():
    v1 = sample_unit_sphere(np.random.default_rng(42), 10)
    v2 = sample_unit_sphere(np.random.default_rng(42), 10)
    assert np.array_equal(v1, v2)


def test_fibonacci_sphere_unit_norm_and_spread():
    pts = fibonacci_sphere(100)
    assert pts.shape == (100, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    # z covers (-1, 1) roughly evenly
    assert pts[:, 2].max() > 0.98 and pts[:, 2].min() < -0.98
    assert abs(pts[:, 2].mean()) < 1e-12


def test_fibonacci_sphere_offset_shifts_lattice():
    p0 = fibonacci_sphere(32)
    p1 = fibonacci_sphere(32, offset=0.5)
    assert not np.allclose(p0, p1)
    assert np.allclose(p0[:, 2], p1[:, 2])  # offset only rotates azimuth


def test_fibonacci_sphere_rejects_empty():
    with pytest.raises(ValueError):
        fibonacci_sphere(0)


def test_geodesic_from_hits_requested_overlap():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = sample_unit_sphere(rng)
        t = sample_unit_sphere(rng)
        for eps in (1e-8, 1e-3, 0.5, 1.7):
            b = geodesic_from(a, t, eps)
            assert abs(np.linalg.norm(b) - 1.0) < 1e-12
            assert abs(float(a @ b) - (1.0 - eps)) < 1e-12


def test_geodesic_from_endpoints():
    a = np.array([0.0, 0.0, 1.0])
    t = np.array([1.0, 0.0, 0.0])
    assert np.allclose(geodesic_from(a, t, 0.0), a)
    assert np.allclose(geodesic_from(a, t, 2.0), -a)


def test_geodesic_from_rejects_bad_eps_and_tangent():
    a = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        geodesic_from(a, np.array([1.0, 0.0, 0.0]), 2.5)
    with pytest.raises(DegenerateTangentError):
        geodesic_from(a, a, 0.1)
    with pytest.raises(DegenerateTangentError):
        geodesic_from(a, -a * (1 + 1e-12), 0.1)


def test_perp_is_orthogonal_unit():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = sample_unit_sphere(rng)
        p = perp(a)
        assert abs(float(a @ p)) < 1e-12
        assert abs(np.linalg.norm(p) - 1.0) < 1e-12


def test_coplanar_angles():
    assert np.allclose(coplanar(0.0), [0.0, 0.0, 1.0])
    assert np.allclose(coplanar(90.0), [1.0, 0.0, 0.0], atol=1e-15)
    # dot product between coplanar vectors is cos of the angle difference
    for t1, t2 in [(0.0, 45.0), (30.0, 150.0), (10.0, 350.0)]:
        c = float(coplanar(t1) @ coplanar(t2))
        assert c == pytest.approx(np.cos(np.deg2rad(t2 - t1)), abs=1e-12)
