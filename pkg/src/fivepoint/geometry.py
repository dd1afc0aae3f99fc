"""Small planar and spatial geometry helpers shared by the constructions and oracles."""
from __future__ import annotations

import math

import numpy as np


def model_angle(a: float, b: float, c: float) -> float:
    """Angle between sides ``a`` and ``b`` of the Euclidean triangle with sides ``a, b, c``.

    Uses Kahan's cancellation-free formula, so needle-like triangles keep
    full relative accuracy.  Sides slightly violating the triangle
    inequality are clamped to the degenerate angle (0 or pi).  A zero
    adjacent side gives 0.
    """
    if a <= 0 or b <= 0:
        return 0.0
    if a < b:
        a, b = b, a
    if b >= c:
        mu = c - (a - b)
    else:
        mu = b - (a - c)
    num = ((a - b) + c) * mu
    den = (a + (b + c)) * ((a - c) + b)
    if num <= 0:
        return 0.0
    if den <= 0:
        return math.pi
    return 2.0 * math.atan(math.sqrt(num / den))


def vec_angle(u, v) -> float:
    """Unsigned angle between two vectors in R^2 or R^3."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] == 2:
        cr = abs(u[0] * v[1] - u[1] * v[0])
    else:
        cr = float(np.linalg.norm(np.cross(u, v)))
    return math.atan2(cr, float(u @ v))


def hinge(o, a, b) -> float:
    """Angle at ``o`` between the directions to ``a`` and ``b``."""
    o = np.asarray(o, dtype=float)
    return vec_angle(np.asarray(a, dtype=float) - o, np.asarray(b, dtype=float) - o)


def cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def rot(phi: float) -> np.ndarray:
    return np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])


def reflect_across_line(y, a, b) -> np.ndarray:
    """Mirror image of ``y`` in the line through ``a`` and ``b``."""
    y, a, b = (np.asarray(t, dtype=float) for t in (y, a, b))
    d = (b - a) / np.linalg.norm(b - a)
    foot = a + ((y - a) @ d) * d
    return 2 * foot - y


def detour_via_segment(a, b, o, d, t0: float, t1: float) -> float:
    """``min |a - z| + |z - b|`` over ``z = o + t d``, ``t in [t0, t1]`` (``|d| = 1``).

    On the full line the optimum is ``sqrt((t_a - t_b)^2 + (rho_a + rho_b)^2)``
    where ``t`` are projections and ``rho`` distances to the line; the
    objective is convex in ``t``, so outside the interval the nearest end
    is optimal.
    """
    a, b, o, d = (np.asarray(t, dtype=float) for t in (a, b, o, d))
    ta, tb = float((a - o) @ d), float((b - o) @ d)
    ra = float(np.linalg.norm(a - o - ta * d))
    rb = float(np.linalg.norm(b - o - tb * d))
    if ra + rb > 0:
        t = ta + (tb - ta) * ra / (ra + rb)
    else:
        t = ta
    if t0 <= t <= t1:
        return math.hypot(ta - tb, ra + rb)
    t = min(max(t, t0), t1)
    z = o + t * d
    return float(np.linalg.norm(a - z) + np.linalg.norm(z - b))


def circle_intersection(c1, r1: float, c2, r2: float, side: int = 1):
    """Intersection of two circles in R^2; ``side`` picks the left (+1) or right (-1) point
    as seen from ``c1`` towards ``c2``.  Near-tangent circles return the tangency point."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    d = float(np.linalg.norm(c2 - c1))
    if d == 0:
        raise ValueError("concentric circles")
    x = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h2 = r1 * r1 - x * x
    h = math.sqrt(h2) if h2 > 0 else 0.0
    e = (c2 - c1) / d
    n = np.array([-e[1], e[0]])
    return c1 + x * e + side * h * n


def circle_distance(length: float, u: float, v: float) -> float:
    """Intrinsic distance between positions ``u`` and ``v`` on a circle of the given length."""
    if not length > 0 or not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError("circle length must be positive and positions finite")
    t = abs(u - v) % length
    return min(t, length - t)
