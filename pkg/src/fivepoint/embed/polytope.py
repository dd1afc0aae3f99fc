"""Doubled convex polytopes for metrics with a four-point tense set.

The tense array ``(p, x1, x2, x3)`` is drawn flat in the plane ``z = 0``
of ``R^3``.  Four mirror points ``q~, q~_1, q~_2, q~_3`` are chosen so that
their distances to the flat points dominate the metric with the right
equalities, ``s~`` lies in the intersection of the four balls around the
flat points, and ``V`` is cut out by the perpendicular bisectors of
``[s~, mirror]``.  In the doubling of ``V`` the fifth point ``q`` sits at
``s~`` on the second sheet.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

from ..comparison import TAU_CFG, TenseSet
from ..geometry import hinge, model_angle
from ..metric import FiniteMetric
from .certificates import DoubledPolytopeCert, Halfspace
from .errors import EmbedError, InfeasibleArcs, InfeasibleBalls

TAU_ANG = 1e-9
TAU_EDGE = 1e-7
MAX_ATTEMPTS = 8


def _planar(real: np.ndarray) -> np.ndarray:
    """Rows of ``real`` (center first, at the origin) in 2D coordinates."""
    real = np.asarray(real, dtype=float)
    _, sv, Vt = np.linalg.svd(real[1:], full_matrices=False)
    if len(sv) < 2 or sv[1] <= 1e-9 * max(sv[0], 1e-300):
        raise EmbedError("tense array is collinear; the planar construction needs a triangle")
    return real @ Vt[:2].T


def _lift_u(xs2: np.ndarray, c: np.ndarray, r: float):
    """Point ``u`` in the disc of radius ``r`` maximising ``min_i (c_i - <x_i, u>) / |x_i|``.

    Optimal points make the disc active together with one or two
    constraints, or equalise all three constraints inside the disc; every
    such candidate is evaluated.
    """
    norms = np.linalg.norm(xs2, axis=1)
    A = xs2 / norms[:, None]
    b = c / norms

    def score(u):
        return float((b - A @ u).min())

    cands = [np.zeros(2)]
    for a in A:
        cands.append(-r * a)
    for i, j in itertools.combinations(range(len(A)), 2):
        # (a_i - a_j) . u = b_i - b_j intersected with the circle
        g = A[i] - A[j]
        ng = float(np.linalg.norm(g))
        if ng < 1e-15:
            continue
        e = g / ng
        off = (b[i] - b[j]) / ng
        if abs(off) <= r:
            tdir = np.array([-e[1], e[0]])
            h = math.sqrt(r * r - off * off)
            cands += [off * e + h * tdir, off * e - h * tdir]
    M = np.array([A[0] - A[1], A[0] - A[2]])
    if abs(np.linalg.det(M)) > 1e-15:
        u = np.linalg.solve(M, [b[0] - b[1], b[0] - b[2]])
        if u @ u <= r * r:
            cands.append(u)
    best = max(cands, key=score)
    return best, score(best), score


def _arc_interval(X: np.ndarray, i: int, P: np.ndarray, m: FiniteMetric, lab: dict) -> tuple[float, float, np.ndarray]:
    """Admissible directions for ``q~_i`` inside the angle vertical to the hinge at ``x~_i``.

    Directions are measured from the bisector of the vertical angle.  The
    model-angle condition towards a point ``y`` keeps directions within
    ``pi - angle`` of the ray opposite to ``y``.
    """
    j, k = [t for t in range(3) if t != i]
    xi = X[i]
    uj = (X[j] - xi) / np.linalg.norm(X[j] - xi)
    uk = (X[k] - xi) / np.linalg.norm(X[k] - xi)
    bis = -(uj + uk)
    bis /= np.linalg.norm(bis)
    alpha = hinge(xi, X[j], X[k])
    lo, hi = -alpha / 2, alpha / 2
    qi = lab[f"x{i + 1}"]
    rho = m.dist(qi, lab["q"])

    def rel(vec):
        return math.atan2(bis[0] * vec[1] - bis[1] * vec[0], bis @ vec)

    targets = [(X[t], lab[f"x{t + 1}"]) for t in (j, k)] + [(P, lab["p"])]
    for y, ylab in targets:
        mang = model_angle(m.dist(qi, ylab), rho, m.dist(ylab, lab["q"]))
        a = rel(-(y - xi))
        lo = max(lo, a - (math.pi - mang))
        hi = min(hi, a + (math.pi - mang))
    return lo, hi, bis


def _best_s(P: np.ndarray, X: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, float]:
    """Plane point maximising the smallest slack of the four balls and the triangle's sides."""
    centers = np.vstack([P, X])
    tri_n, tri_o = [], []
    for i in range(3):
        a, b = X[i], X[(i + 1) % 3]
        e = (b - a) / np.linalg.norm(b - a)
        n = np.array([-e[1], e[0]])
        if n @ (X[(i + 2) % 3] - a) < 0:
            n = -n
        tri_n.append(n)
        tri_o.append(a)
    tri_n, tri_o = np.array(tri_n), np.array(tri_o)

    def slacks(z):
        s = z[:2]
        ball = radii - np.sqrt(((centers - s) ** 2).sum(1) + 1e-300)
        hull = ((s - tri_o) * tri_n).sum(1)
        return np.concatenate([ball, hull])

    x0 = np.r_[X.mean(0), 0.0]
    x0[2] = slacks(x0).min()
    cons = [{"type": "ineq", "fun": lambda z: slacks(z) - z[2]}]
    res = minimize(lambda z: -z[2], x0, constraints=cons, method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    z = res.x if res.success or slacks(res.x).min() > x0[2] else x0
    return z[:2], float(slacks(z).min())


def _edges(hs: list[Halfspace], tol: float):
    """Edges of ``V`` as ``(point, unit direction, t0, t1)`` with the two facet indices."""
    out = []
    for f, g in itertools.combinations(range(len(hs)), 2):
        nf, ng = hs[f].normal, hs[g].normal
        d = np.cross(nf, ng)
        nd = float(np.linalg.norm(d))
        if nd < 1e-12:
            continue
        d /= nd
        o = np.linalg.lstsq(np.array([nf, ng]), np.array([hs[f].offset, hs[g].offset]), rcond=None)[0]
        t0, t1 = -math.inf, math.inf
        for h, H in enumerate(hs):
            if h in (f, g):
                continue
            rate = float(H.normal @ d)
            room = H.offset - float(H.normal @ o)
            if abs(rate) < 1e-15:
                if room < -tol:
                    t0, t1 = 1.0, 0.0
                continue
            if rate > 0:
                t1 = min(t1, room / rate)
            else:
                t0 = max(t0, room / rate)
        if t0 <= t1 + tol:
            out.append((o, d, t0, max(t0, t1), f, g))
    return out


def facet_edges(cert: DoubledPolytopeCert, tol: float = 1e-12):
    return _edges(cert.halfspaces, tol)


def _point_segment(y, o, d, t0, t1) -> float:
    t = min(max(float((y - o) @ d), t0), t1)
    return float(np.linalg.norm(y - (o + t * d)))


def edge_clearance(cert: DoubledPolytopeCert) -> float:
    """Smallest distance from a placed point to an edge of ``V``."""
    pts = [np.asarray(v) for v in cert.sheet1.values()] + [np.asarray(v) for v in cert.sheet2.values()]
    best = math.inf
    for o, d, t0, t1, _, _ in facet_edges(cert):
        for y in pts:
            best = min(best, _point_segment(y, o, d, t0, t1))
    return best


def embed_doubled_polytope(m: FiniteMetric, tense4: TenseSet, q: str | None = None, seed: int = 0,
                           max_attempts: int = MAX_ATTEMPTS) -> DoubledPolytopeCert:
    """Doubled-polytope certificate for a metric with the tense array ``tense4``.

    The first attempt takes the widest-margin choices (interval midpoints,
    largest slack); when a placed point lands within ``1e-7 * diameter`` of
    an edge of ``V`` the choices of ``q~`` and ``q~_i`` are resampled from
    their feasible sets with the seeded generator, up to ``max_attempts``
    times.  If that never clears the edges, the last certificate is returned
    with ``general_position = False``; the distances are still exact.
    """
    if tense4.size != 4:
        raise EmbedError("need a four-point tense array")
    p = tense4.center
    xs = list(tense4.others)
    rest = [lab for lab in m.labels if lab not in tense4.points]
    if q is None:
        if len(rest) != 1:
            raise EmbedError("metric must have exactly one point outside the tense array")
        q = rest[0]
    lab = {"p": p, "q": q, "x1": xs[0], "x2": xs[1], "x3": xs[2]}
    scale = m.scale()
    r = m.dist(p, q)
    rho = np.array([m.dist(x, q) for x in xs])
    if r == 0 or rho.min() == 0:
        raise EmbedError("q coincides with a point of the tense array; use a lower-dimensional certificate")

    flat = _planar(tense4.realization)
    P2, X2 = flat[0], flat[1:]
    D = np.linalg.norm(flat[:, None] - flat[None], axis=-1)
    target = m.submetric([p] + xs).matrix
    if np.abs(D - target).max() > TAU_CFG * scale:
        raise EmbedError("tense realization does not match the metric")

    c = ((X2 ** 2).sum(1) + r * r - rho ** 2) / 2
    u_best, slack_u, score_u = _lift_u(X2, c, r)
    if slack_u < -TAU_CFG * scale:
        raise InfeasibleBalls(f"no lift of q keeps the comparison inequalities (slack {slack_u:.3g})")
    arcs = [_arc_interval(X2, i, P2, m, lab) for i in range(3)]
    for i, (lo, hi, _) in enumerate(arcs):
        if lo > hi + TAU_ANG:
            raise InfeasibleArcs(f"arcs at {xs[i]} do not meet: [{lo:.12g}, {hi:.12g}]")
    s2, slack_s = _best_s(P2, X2, np.r_[r, rho])
    if slack_s < -TAU_CFG * scale:
        raise InfeasibleBalls(f"the four balls have no common point in the triangle (slack {slack_s:.3g})")

    rng = np.random.default_rng(seed)
    lift = lambda v: np.r_[v, 0.0]  # noqa: E731
    cert = None
    for attempt in range(1, max_attempts + 1):
        if attempt == 1:
            u = u_best
            phis = [0.5 * (lo + hi) for lo, hi, _ in arcs]
        else:
            u = u_best
            for _ in range(200):
                cand = rng.uniform(-r, r, size=2)
                if cand @ cand <= r * r and score_u(cand) >= 0:
                    u = cand
                    break
            phis = [rng.uniform(min(lo, hi), max(lo, hi)) for lo, hi, _ in arcs]
        qt = np.r_[u, math.sqrt(max(r * r - u @ u, 0.0))]
        mirrors = {"q": qt}
        for i, ((_, _, bis), phi) in enumerate(zip(arcs, phis)):
            rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
            mirrors[f"q{i + 1}"] = lift(X2[i] + rho[i] * (rot @ bis))
        s3 = lift(s2)
        hs = []
        for y in mirrors.values():
            gap = y - s3
            ng = float(np.linalg.norm(gap))
            if ng <= 1e-12 * scale:
                continue  # mirror coincides with s~: no wall
            n = gap / ng
            hs.append(Halfspace(n, float(n @ (0.5 * (y + s3)))))
        sheet1 = {p: lift(P2)}
        for i, x in enumerate(xs):
            sheet1[x] = lift(X2[i])
        for y in sheet1.values():
            for h in hs:
                if h.value(y) > TAU_CFG * scale:
                    raise EmbedError("a flat point falls outside V")
        cert = DoubledPolytopeCert(lab, hs, sheet1, {q: s3}, mirrors, True, attempt)
        if edge_clearance(cert) > TAU_EDGE * scale:
            return cert
    cert.general_position = False
    return cert
