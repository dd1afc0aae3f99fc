"""Flat discs with cone points built from two tense triples with a common center.

The disc is glued from the four triangles ``[x v_i w_j]``.  Twelve corner
angles determine it: the four at ``x`` come from a planar comparison
configuration in which ``v1 x v2`` and ``w1 x w2`` are straight, the other
eight from reflected copies of model triangles.
"""
from __future__ import annotations

import math

import numpy as np

from ..comparison import TAU_CFG
from ..geometry import cross2, hinge, model_angle
from ..metric import FiniteMetric
from .certificates import ConeDiscCert, ConeTriangle
from .errors import ApexOutside, ConditionGroupFailed, ConeTriangleError, EmbedError, ThetaInfeasible

TAU_ANG = 1e-9
ROLES = ("x", "v1", "v2", "w1", "w2")
TRIANGLES = (("v1", "w1"), ("v2", "w1"), ("v2", "w2"), ("v1", "w2"))  # counterclockwise around x


def _segments_cross(p1, p2, p3, p4) -> bool:
    d1 = cross2(p2 - p1, p3 - p1)
    d2 = cross2(p2 - p1, p4 - p1)
    d3 = cross2(p4 - p3, p1 - p3)
    d4 = cross2(p4 - p3, p2 - p3)
    return d1 * d2 < 0 and d3 * d4 < 0


def _polygon_area(pts) -> float:
    x, y = np.asarray(pts).T
    return 0.5 * float(x @ np.roll(y, -1) - y @ np.roll(x, -1))


def _is_simple(pts) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                return False
    return True


def realize_cone_triangle(a: float, b: float, c: float, A: float, B: float, C: float,
                          vertices=("P", "Q", "R"), tol: float = TAU_ANG) -> ConeTriangle:
    """Geodesic triangle in a flat cone with sides ``a, b, c`` and corner angles ``A, B, C``.

    ``A`` sits between sides ``b`` and ``c``, and so on.  The chart places
    ``P`` at the origin and ``Q`` at ``(c, 0)``; the two copies of ``R`` are
    laid off at angles ``A`` and ``B``.  The cone point lies on the
    perpendicular bisector of the copies: the isosceles triangle it cuts off
    has apex angle ``2 pi - omega``, which fixes its height in closed form.
    """
    sides = (a, b, c)
    big = max(sides)
    if min(sides) < 0 or 2 * big > sum(sides) + 1e-12 * big:
        raise ConeTriangleError(f"sides {sides} violate the triangle inequality")
    models = (model_angle(b, c, a), model_angle(a, c, b), model_angle(a, b, c))
    for name, ang, mod in zip("ABC", (A, B, C), models):
        if ang < mod - tol:
            raise ConeTriangleError(f"angle {name}={ang:.12g} is below the model angle {mod:.12g}")
    total = A + B + C
    if total < math.pi - tol:
        raise ConeTriangleError(f"angle sum {total:.12g} is below pi")
    omega = 3 * math.pi - total
    if omega <= 0:
        raise ConeTriangleError(f"angle sum {total:.12g} leaves no cone angle")
    P = np.zeros(2)
    Q = np.array([c, 0.0])
    R1 = b * np.array([math.cos(A), math.sin(A)])
    R2 = Q + a * np.array([-math.cos(B), math.sin(B)])
    half = 0.5 * float(np.linalg.norm(R1 - R2))
    flat = abs(total - math.pi) <= tol or half <= 1e-12 * max(big, 1e-300)
    if flat:
        R = 0.5 * (R1 + R2)
        return ConeTriangle(tuple(vertices), sides, (A, B, C), 2 * math.pi if abs(total - math.pi) <= tol else omega,
                            P, Q, R.copy(), R.copy(), None)
    M = 0.5 * (R1 + R2)
    # the chart P, Q, R2, R1 runs counterclockwise: its inside is left of R2 -> R1
    e = (R1 - R2) / (2 * half)
    n = np.array([-e[1], e[0]])
    t = half * math.tan(0.5 * (omega - math.pi))
    z = M + t * n
    chart = [P, Q, R2, z, R1]
    if not _is_simple(chart) or _polygon_area(chart) <= 0:
        raise ApexOutside(f"cone point {z.tolist()} does not give a simple chart")
    return ConeTriangle(tuple(vertices), sides, (A, B, C), omega, P, Q, R1, R2, z)


def check_cone_triangle(T: ConeTriangle) -> dict:
    """Residuals of the chart: side lengths, cut-edge equality, angles."""
    a, b, c = T.sides
    A, B, C = T.angles
    out = {
        "side_c": abs(np.linalg.norm(T.Q - T.P) - c),
        "side_a": abs(np.linalg.norm(T.R2 - T.Q) - a),
        "side_b": abs(np.linalg.norm(T.R1 - T.P) - b),
        "angle_A": abs(hinge(T.P, T.Q, T.R1) - A),
    }
    if T.z is None:
        return out
    out["cut"] = abs(np.linalg.norm(T.z - T.R1) - np.linalg.norm(T.z - T.R2))
    cone = hinge(T.z, T.P, T.Q) + hinge(T.z, T.Q, T.R2) + hinge(T.z, T.R1, T.P)
    out["omega"] = abs(cone - T.omega)
    out["angle_B"] = abs(hinge(T.Q, T.P, T.R2) - B)
    out["angle_C"] = abs(hinge(T.R1, T.P, T.z) + hinge(T.R2, T.Q, T.z) - C)
    return out


def _reflector(base, s):
    """Reflection across the perpendicular bisector of ``[base, s]``."""
    d = s - base
    nd = float(np.linalg.norm(d))
    if nd == 0:
        return lambda y: np.array(y, dtype=float)
    n = d / nd
    mid = 0.5 * (base + s)
    return lambda y: y - 2.0 * float((y - mid) @ n) * n


def _model_apex(p1, p2, r1, r2, away_from):
    """Third vertex of the triangle on ``p1 p2`` with sides ``r1, r2``, opposite ``away_from``."""
    d = float(np.linalg.norm(p2 - p1))
    e = (p2 - p1) / d
    n = np.array([-e[1], e[0]])
    x = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h = math.sqrt(max(r1 * r1 - x * x, 0.0))
    side = -1.0 if n @ (away_from - p1) > 0 else 1.0
    return p1 + x * e + side * h * n


def zigzag(s1: float, beta: float, s2: float, gamma: float, s3: float) -> float:
    """End-to-end distance of the plane polyline ``A B C D`` with ``|AB|=s1``, ``|BC|=s2``,
    ``|CD|=s3``, angles ``beta`` at ``B`` and ``gamma`` at ``C``, and ``A``, ``D`` on
    opposite sides of the line ``BC``."""
    Ap = s1 * np.array([math.cos(beta), math.sin(beta)])
    D = np.array([s2, 0.0]) + s3 * np.array([-math.cos(gamma), -math.sin(gamma)])
    return float(np.linalg.norm(Ap - D))


def _key(v, w, at):
    return f"{v}{w}@{at}"


def cone_disc_conditions(m: FiniteMetric, cert: ConeDiscCert) -> list[tuple[str, int, float, str]]:
    """The 28 scalar conditions on the corner angles as ``(group, index, slack, kind)``.

    ``kind`` is ``"ge"`` (slack must be nonnegative) or ``"eq"`` (slack must
    vanish).  Group ``*`` compares the 12 angles with model angles, ``**``
    compares ``|v1 v2|`` and ``|w1 w2|`` with the 8 straightened three-edge
    paths and ``***`` holds the 8 angle identities.  Angle slacks are in
    radians, path slacks in units of distance.
    """
    R = cert.roles
    d = lambda r, s: m.dist(R[r], R[s])  # noqa: E731
    ang = cert.angles
    out = []
    k = 0
    for v, w in TRIANGLES:
        for at, o1, o2 in (("x", v, w), (v, "x", w), (w, "x", v)):
            out.append(("*", k, ang[_key(v, w, at)] - model_angle(d(at, o1), d(at, o2), d(o1, o2)), "ge"))
            k += 1
    k = 0
    for (a1, a2), (b1, b2) in ((("v1", "v2"), ("w1", "w2")), (("w1", "w2"), ("v1", "v2"))):
        tri = lambda p, q: (p, q) if p.startswith("v") else (q, p)  # noqa: E731
        for mid in (b1, b2):
            t1 = tri(a1, mid)
            t2 = tri(a2, mid)
            # a1 mid x a2
            z1 = zigzag(d(a1, mid), ang[_key(*t1, mid)], d(mid, "x"), ang[_key(*t2, "x")], d("x", a2))
            out.append(("**", k, z1 - d(a1, a2), "ge"))
            k += 1
            # a1 x mid a2
            z2 = zigzag(d(a1, "x"), ang[_key(*t1, "x")], d("x", mid), ang[_key(*t2, mid)], d(mid, a2))
            out.append(("**", k, z2 - d(a1, a2), "ge"))
            k += 1
    k = 0
    for vi in ("v1", "v2"):
        s = ang[_key(vi, "w1", vi)] + ang[_key(vi, "w2", vi)]
        out.append(("***", k, s - model_angle(d(vi, "w1"), d(vi, "w2"), d("w1", "w2")), "eq"))
        k += 1
    for wj in ("w1", "w2"):
        s = ang[_key("v1", wj, wj)] + ang[_key("v2", wj, wj)]
        out.append(("***", k, s - model_angle(d(wj, "v1"), d(wj, "v2"), d("v1", "v2")), "eq"))
        k += 1
    for vi in ("v1", "v2"):
        out.append(("***", k, ang[_key(vi, "w1", "x")] + ang[_key(vi, "w2", "x")] - math.pi, "eq"))
        k += 1
    for wj in ("w1", "w2"):
        out.append(("***", k, ang[_key("v1", wj, "x")] + ang[_key("v2", wj, "x")] - math.pi, "eq"))
        k += 1
    return out


def failed_conditions(m: FiniteMetric, cert: ConeDiscCert, tol: float = 1e-9):
    """Conditions violated beyond ``tol`` (radians for angles, ``tol * diameter`` for paths)."""
    bad = []
    for group, k, slack, kind in cone_disc_conditions(m, cert):
        t = tol * m.scale() if group == "**" else tol
        if (kind == "ge" and slack < -t) or (kind == "eq" and abs(slack) > t):
            bad.append((group, k, slack))
    return bad


def theta_interval(m: FiniteMetric, roles: dict) -> tuple[float, float]:
    """Angles ``theta`` between the lines ``v1 v2`` and ``w1 w2`` keeping all cross distances."""
    d = lambda r, s: m.dist(roles[r], roles[s])  # noqa: E731
    ma = lambda v, w: model_angle(d("x", v), d("x", w), d(v, w))  # noqa: E731
    lo = max(ma("v2", "w1"), ma("v1", "w2"))
    hi = min(math.pi - ma("v1", "w1"), math.pi - ma("v2", "w2"))
    return lo, hi


def embed_cone_disc(m: FiniteMetric, shared: dict, check: bool = True, tol: float = 1e-9) -> ConeDiscCert:
    """Cone-disc certificate for tense triples ``v1 x v2`` and ``w1 x w2``.

    ``shared`` maps the roles ``x, v1, v2, w1, w2`` to labels.
    """
    roles = {r: shared[r] for r in ROLES}
    if len(set(roles.values())) != 5:
        raise EmbedError("roles must name five distinct points")
    d = lambda r, s: m.dist(roles[r], roles[s])  # noqa: E731
    scale = m.scale()
    for a, b in (("v1", "v2"), ("w1", "w2")):
        if abs(d(a, "x") + d("x", b) - d(a, b)) > TAU_CFG * scale:
            raise EmbedError(f"{roles[a]}{roles['x']}{roles[b]} is not tense")
    if min(d("x", r) for r in ROLES[1:]) <= 0:
        raise EmbedError("coincident points; use a lower-dimensional certificate")

    lo, hi = theta_interval(m, roles)
    if lo > hi + TAU_ANG:
        raise ThetaInfeasible(f"theta interval [{lo:.12g}, {hi:.12g}] is empty")
    theta = 0.5 * (lo + hi)
    u = np.array([math.cos(theta), math.sin(theta)])
    P = {"x": np.zeros(2), "v1": np.array([-d("x", "v1"), 0.0]), "v2": np.array([d("x", "v2"), 0.0]),
         "w1": d("x", "w1") * u, "w2": -d("x", "w2") * u}

    angles: dict[str, float] = {}
    aux: dict[str, np.ndarray] = {}
    # angles at x straight from the planar configuration
    for v, w in TRIANGLES:
        angles[_key(v, w, "x")] = hinge(P["x"], P[v], P[w])
    # angles at v_i (reflect w's) and at w_j (reflect v's)
    for base, pair in (("v1", ("w1", "w2")), ("v2", ("w1", "w2")), ("w1", ("v1", "v2")), ("w2", ("v1", "v2"))):
        o1, o2 = pair
        s = _model_apex(P[o1], P[o2], d(base, o1), d(base, o2), P[base])
        refl = _reflector(P[base], s)
        for o in pair:
            img = refl(P[o])
            aux[f"{o[0]}{base[1]}{o[1]}"] = img
            v, w = (base, o) if base[0] == "v" else (o, base)
            angles[_key(v, w, base)] = hinge(P[base], img, P["x"])

    triangles = []
    for v, w in TRIANGLES:
        T = realize_cone_triangle(d(w, "x"), d(v, "x"), d(v, w), angles[_key(v, w, v)], angles[_key(v, w, w)],
                                  angles[_key(v, w, "x")], vertices=(roles[v], roles[w], roles["x"]))
        triangles.append(T)
    cert = ConeDiscCert(roles, P, aux, theta, angles, triangles)
    if check:
        bad = failed_conditions(m, cert, tol)
        if bad:
            raise ConditionGroupFailed(*bad[0])
    return cert
