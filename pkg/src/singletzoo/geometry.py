"""Unit vectors on S^2: sampling, geodesic displacement, small helpers.

Vectors are plain numpy arrays of shape (3,); batches are (n, 3).
Random sampling goes through numpy Generator objects so that callers
control seeding.  Worker streams should be derived from a master seed
with ``numpy.random.SeedSequence(seed).spawn(k)``; nothing in here
keeps global state.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegenerateTangentError",
    "unit",
    "dot",
    "sgn",
    "sample_unit_sphere",
    "fibonacci_sphere",
    "geodesic_from",
    "perp",
    "coplanar",
]


class DegenerateTangentError(ValueError):
    """Tangent direction is (numerically) parallel to the base point."""


def unit(v):
    """Normalize a vector (or batch of vectors) to unit length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def dot(a, b):
    """Dot product along the last axis."""
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def sgn(t):
    """Sign with the convention sgn(0) = +1, elementwise."""
    return np.where(np.asarray(t) >= 0, 1.0, -1.0)


def sample_unit_sphere(rng, n=None):
    """Draw uniform points on the unit sphere.

    With ``n=None`` returns a single (3,) vector, otherwise an (n, 3)
    array.  Uses the exact inverse-CDF construction: z uniform on
    [-1, 1], azimuth uniform on [0, 2*pi); the surface element
    dA = dz dphi makes this uniform without rejection.
    """
    m = 1 if n is None else int(n)
    z = rng.uniform(-1.0, 1.0, m)
    phi = rng.uniform(0.0, 2.0 * np.pi, m)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    out = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return out[0] if n is None else out


def fibonacci_sphere(n, offset=0.0):
    """(n, 3) low-discrepancy lattice on the sphere (golden-angle spiral).

    ``offset`` shifts the lattice phase, giving a second grid that is
    everywhere well separated from the first; useful for building
    setting pairs that cover the full range of a.b without randomness.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1 lattice points")
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    phi = 2.0 * np.pi * ((k + offset) * (np.sqrt(5.0) - 1.0) / 2.0 % 1.0)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def geodesic_from(a, t, eps):
    """Point b on the great circle through ``a`` (toward ``t``) with a.b = 1 - eps.

    The tangent used is the component of ``t`` orthogonal to ``a``; an
    error is raised when that component has norm below 1e-9, since the
    direction of displacement would be undefined.  eps = 0 returns
    ``a`` itself, eps = 2 the antipode.
    """
    a = np.asarray(a, dtype=float)
    t = np.asarray(t, dtype=float)
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must lie in [0, 2], got {eps}")
    tp = t - (t @ a) * a
    nrm = np.linalg.norm(tp)
    if nrm < 1e-9:
        raise DegenerateTangentError(
            "tangent is parallel to the base point; supply a non-collinear direction"
        )
    tp = tp / nrm
    return (1.0 - eps) * a + np.sqrt(eps * (2.0 - eps)) * tp


def perp(a):
    """A deterministic unit vector orthogonal to ``a``.

    Crosses ``a`` with the coordinate axis it is least aligned with, so
    the result is stable under small perturbations of ``a``.
    """
    a = np.asarray(a, dtype=float)
    e = np.zeros(3)
    e[int(np.argmin(np.abs(a)))] = 1.0
    return unit(np.cross(a, e))


def coplanar(angle_deg):
    """Unit vector at ``angle_deg`` degrees from +z in the x-z plane."""
    th = np.deg2rad(angle_deg)
    return np.array([np.sin(th), 0.0, np.cos(th)])
