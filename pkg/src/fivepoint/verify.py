"""Independent distance oracles, certificate verification and samplers.

Nothing here trusts the constructions: every certificate is checked by
recomputing the distances it induces in its model space.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .embed.certificates import (
    CircleCert,
    ConeDiscCert,
    DoubledPolytopeCert,
    EuclideanCert,
    ProductCert,
)
from .geometry import circle_distance, circle_intersection, cross2, detour_via_segment
from .metric import FiniteMetric, validate_metric

__all__ = [
    "circle_distance", "surface_distance", "surface_distances", "doubling_distance",
    "certificate_distances", "verify_certificate", "VerificationReport", "oracle_lss_grid",
    "sample_metric", "BadParams", "PointOutsideV", "OracleFailure",
]

UNFOLD_DEPTH = 8


class OracleFailure(RuntimeError):
    pass


class PointOutsideV(OracleFailure):
    pass


class BadParams(ValueError):
    pass


# ---------------------------------------------------------------------------
# cone-disc surfaces


@dataclass
class _Piece:
    names: tuple  # three vertex names (cone points start with "z:")
    lengths: dict  # frozenset pair -> edge length


class SurfaceComplex:
    """Flat triangles glued along named edges, built from a cone-disc certificate."""

    def __init__(self, cert: ConeDiscCert):
        self.vertices = list(cert.labels)
        self.pieces: list[_Piece] = []
        self.by_edge: dict[frozenset, list[int]] = {}
        for k, T in enumerate(cert.triangles):
            for names, pts in T.pieces(f"z:{k}"):
                lengths = {}
                for a, b in ((0, 1), (1, 2), (2, 0)):
                    lengths[frozenset((names[a], names[b]))] = float(np.linalg.norm(pts[a] - pts[b]))
                idx = len(self.pieces)
                self.pieces.append(_Piece(tuple(names), lengths))
                for e in lengths:
                    self.by_edge.setdefault(e, []).append(idx)

    def _straight(self, source: str, depth: int) -> dict:
        """Shortest straight unfolded segments from ``source`` to every vertex.

        Depth-first over edge-crossing sequences; the window of admissible
        directions is an interval of unwrapped angles that shrinks at every
        crossed edge, and empty windows are cut.
        Branches whose entry edge lies beyond every current bound are cut
        too.
        """
        best = {v: math.inf for v in self.vertices}
        best[source] = 0.0
        eps = 1e-13

        def edge_len(a, b):
            for i in self.by_edge.get(frozenset((a, b)), []):
                return self.pieces[i].lengths[frozenset((a, b))]
            return math.inf

        for i, piece in enumerate(self.pieces):
            if source not in piece.names:
                continue
            others = [n for n in piece.names if n != source]
            for n in others:
                if not n.startswith("z:"):
                    best[n] = min(best[n], piece.lengths[frozenset((source, n))])

        # seed an upper bound through the edge graph
        bound = max((v for v in best.values() if v < math.inf), default=0.0)
        bound = max(bound, sum(p.lengths[e] for p in self.pieces for e in p.lengths))

        def ang(v):
            return math.atan2(float(v[1]), float(v[0]))

        def wrap(t):
            return (t + math.pi) % (2 * math.pi) - math.pi

        def cone(A, B):
            """Directions seen from the origin towards segment AB, as ``(start, width)``."""
            a, b = ang(A), ang(B)
            w = wrap(b - a)
            return (a, w) if w >= 0 else (b, -w)

        def clip(lo, hi, A, B):
            """Intersect the window ``[lo, hi]`` (unwrapped angles) with the cone of AB."""
            a, w = cone(A, B)
            ref = 0.5 * (lo + hi)
            s = ref + wrap(a - ref)
            for start in (s, s - 2 * math.pi, s + 2 * math.pi):
                nlo, nhi = max(lo, start), min(hi, start + w)
                if nlo <= nhi + eps:
                    return nlo, max(nlo, nhi)
            return None

        def inside(lo, hi, Y):
            ref = 0.5 * (lo + hi)
            t = ref + wrap(ang(Y) - ref)
            return lo - eps <= t <= hi + eps

        def dist_to_segment(A, B):
            d = B - A
            t = min(max(float(-A @ d) / float(d @ d), 0.0), 1.0) if d @ d > 0 else 0.0
            return float(np.linalg.norm(A + t * d))

        def visit(pidx, U, W, nu, nw, lo, hi, prev_third, k):
            if k > depth:
                return
            piece = self.pieces[pidx]
            ny = next(n for n in piece.names if n not in (nu, nw))
            lu = piece.lengths[frozenset((nu, ny))]
            lw = piece.lengths[frozenset((nw, ny))]
            side = 1 if cross2(W - U, prev_third - U) < 0 else -1
            Y = circle_intersection(U, lu, W, lw, side)
            if not ny.startswith("z:") and ny != source and inside(lo, hi, Y):
                best[ny] = min(best[ny], float(np.linalg.norm(Y)))
            if k == depth:
                return
            cap = max(best.values())
            for (A, na), (B, nb) in (((U, nu), (Y, ny)), ((Y, ny), (W, nw))):
                nxt = [j for j in self.by_edge[frozenset((na, nb))] if j != pidx]
                if not nxt:
                    continue
                win = clip(lo, hi, A, B)
                if win is None:
                    continue
                if dist_to_segment(A, B) >= min(cap, bound):
                    continue
                third = W if (na, nb) == (nu, ny) else U
                visit(nxt[0], A, B, na, nb, win[0], win[1], third, k + 1)

        for i, piece in enumerate(self.pieces):
            if source not in piece.names:
                continue
            nu, nw = [n for n in piece.names if n != source]
            e = frozenset((nu, nw))
            # chart coordinates of the start piece with the source at the origin
            lu = piece.lengths[frozenset((source, nu))]
            lw = piece.lengths[frozenset((source, nw))]
            luw = piece.lengths[e]
            U = np.array([lu, 0.0])
            W = circle_intersection(np.zeros(2), lw, U, luw, 1)
            lo, w = cone(U, W)
            for j in self.by_edge[e]:
                if j != i:
                    visit(j, U, W, nu, nw, lo, lo + w, np.zeros(2), 1)
        return best

    def distances(self, depth: int = UNFOLD_DEPTH) -> np.ndarray:
        n = len(self.vertices)
        D = np.full((n, n), math.inf)
        for i, v in enumerate(self.vertices):
            row = self._straight(v, depth)
            for j, w in enumerate(self.vertices):
                D[i, j] = row[w]
        D = np.minimum(D, D.T)
        # paths may bend at vertices: close under concatenation
        for k in range(n):
            D = np.minimum(D, D[:, [k]] + D[[k], :])
        return D


def surface_distances(cert: ConeDiscCert, depth: int = UNFOLD_DEPTH) -> tuple[list, np.ndarray]:
    """All vertex-to-vertex geodesic distances on the cone disc (labels, matrix)."""
    S = SurfaceComplex(cert)
    return S.vertices, S.distances(depth)


def surface_distance(cert: ConeDiscCert, a: str, b: str, depth: int = UNFOLD_DEPTH) -> float:
    labels, D = surface_distances(cert, depth)
    return float(D[labels.index(a), labels.index(b)])


# ---------------------------------------------------------------------------
# doublings of convex polytopes


def _edge_lines(hs, tol):
    from .embed.polytope import _edges

    return _edges(hs, tol)


def doubling_distance(cert: DoubledPolytopeCert, a, b, tol: float = 1e-9) -> float:
    """Distance in the doubling of ``V`` between ``a = (sheet, point)`` and ``b``.

    On one sheet it is the chord.  Across sheets it is the shortest path
    through one boundary point: per facet, the reflection of ``b`` when the
    straight segment meets the facet inside ``V``, otherwise the best point
    on the facet's edges.
    """
    (sa, pa), (sb, pb) = a, b
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    hs = cert.halfspaces
    scale = max(1.0, float(np.abs(np.r_[pa, pb]).max()))
    for y in (pa, pb):
        worst = max((h.value(y) for h in hs), default=0.0)
        if worst > tol * scale:
            raise PointOutsideV(f"point {y.tolist()} is outside V by {worst:.3g}")
    if sa == sb:
        return float(np.linalg.norm(pa - pb))
    if not hs:
        raise OracleFailure("V has no boundary; the sheets are disconnected")
    best = math.inf
    for f, F in enumerate(hs):
        b_ref = F.reflect(pb)
        va, vb = F.value(pa), F.value(b_ref)
        if vb - va <= 0:
            continue
        z = pa + (b_ref - pa) * (-va / (vb - va))
        if all(H.value(z) <= tol * scale for g, H in enumerate(hs) if g != f):
            best = min(best, float(np.linalg.norm(pa - b_ref)))
    for o, d, t0, t1, _, _ in _edge_lines(hs, tol * scale):
        best = min(best, detour_via_segment(pa, pb, o, d, t0, t1))
    if best == math.inf:
        raise OracleFailure("no boundary point connects the sheets")
    return best


# ---------------------------------------------------------------------------
# certificates


def certificate_distances(cert, labels) -> np.ndarray:
    """Distances induced by a certificate between the given labels."""
    n = len(labels)
    D = np.zeros((n, n))
    if isinstance(cert, EuclideanCert):
        P = np.array([cert.coords[x] for x in labels])
        return np.linalg.norm(P[:, None] - P[None], axis=-1)
    if isinstance(cert, CircleCert):
        for i, j in itertools.combinations(range(n), 2):
            D[i, j] = D[j, i] = circle_distance(cert.length, cert.positions[labels[i]], cert.positions[labels[j]])
        return D
    if isinstance(cert, ConeDiscCert):
        labs, S = surface_distances(cert)
        idx = [labs.index(x) for x in labels]
        return S[np.ix_(idx, idx)]
    if isinstance(cert, DoubledPolytopeCert):
        for i, j in itertools.combinations(range(n), 2):
            D[i, j] = D[j, i] = doubling_distance(cert, cert.placement(labels[i]), cert.placement(labels[j]))
        return D
    if isinstance(cert, ProductCert):
        sq = np.zeros((n, n))
        for w, c in cert.factors:
            sq += w * certificate_distances(c, labels) ** 2
        return np.sqrt(sq)
    raise OracleFailure(f"unknown certificate type {type(cert).__name__}")


@dataclass
class VerificationReport:
    pairs: list  # dicts: a, b, target, induced, abs, rel
    tol: float
    checks: list = field(default_factory=list)  # (name, value, ok)

    @property
    def max_rel(self) -> float:
        return max((p["rel"] for p in self.pairs), default=0.0)

    @property
    def worst(self) -> dict | None:
        return max(self.pairs, key=lambda p: p["rel"]) if self.pairs else None

    @property
    def passed(self) -> bool:
        return self.max_rel <= self.tol and all(ok for _, _, ok in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "max_rel": self.max_rel, "worst": self.worst,
                "pairs": self.pairs, "checks": [{"name": n, "value": v, "ok": ok} for n, v, ok in self.checks]}


def _polytope_checks(m: FiniteMetric, cert: DoubledPolytopeCert, tol: float) -> list:
    """Membership in ``V`` and the reflection equalities behind each facet."""
    out = []
    scale = m.scale()
    R = cert.roles
    for lab in cert.labels:
        _, y = cert.placement(lab)
        worst = max((h.value(y) for h in cert.halfspaces), default=-math.inf)
        out.append((f"in_V:{lab}", worst, worst <= tol * scale))
    s = cert.sheet2[R["q"]]
    for key, base in (("q", "p"), ("q1", "x1"), ("q2", "x2"), ("q3", "x3")):
        mirror = cert.mirrors[key]
        walls = [h for h in cert.halfspaces
                 if np.linalg.norm(h.reflect(s) - mirror) <= 1e-9 * max(scale, 1.0)]
        if not walls and np.linalg.norm(mirror - s) > 1e-9 * scale:
            out.append((f"wall:{key}", math.inf, False))
            continue
        img = walls[0].reflect(s) if walls else s
        err = abs(float(np.linalg.norm(cert.sheet1[R[base]] - img)) - m.dist(R[base], R["q"]))
        out.append((f"reflection:{key}", err, err <= tol * scale))
    return out


def verify_certificate(m: FiniteMetric, cert, tol: float = 1e-6) -> VerificationReport:
    """Compare all pairwise certificate distances with the metric.

    Errors are relative to the diameter of ``m``.  Doubled polytopes also
    report membership of every placed point in ``V`` and the reflection
    equalities; cone discs report the angle conditions and the stability of
    the unfolding between depths 7 and 8.
    """
    labels = list(m.labels)
    missing = set(labels) - set(cert.labels)
    if missing:
        raise OracleFailure(f"certificate does not place {sorted(missing)}")
    D = certificate_distances(cert, labels)
    scale = m.scale()
    pairs = []
    for i, j in itertools.combinations(range(len(labels)), 2):
        t, got = m.d[i][j], float(D[i, j])
        err = abs(got - t)
        pairs.append({"a": labels[i], "b": labels[j], "target": t, "induced": got, "abs": err, "rel": err / scale})
    checks = []
    if isinstance(cert, DoubledPolytopeCert):
        checks += _polytope_checks(m, cert, tol)
    if isinstance(cert, ConeDiscCert):
        from .embed.cone import cone_disc_conditions

        for group, k, slack, kind in cone_disc_conditions(m, cert):
            t = 1e-9 * (scale if group == "**" else 1.0)
            ok = slack >= -t if kind == "ge" else abs(slack) <= t
            checks.append((f"{group}[{k}]", slack, ok))
        labs, D7 = surface_distances(cert, UNFOLD_DEPTH - 1)
        idx = [labs.index(x) for x in labels]
        drift = float(np.abs(D7[np.ix_(idx, idx)] - D).max())
        checks.append(("unfold_depth_7_vs_8", drift, drift <= 1e-12 * max(scale, 1.0)))
    return VerificationReport(pairs, tol, checks)


# ---------------------------------------------------------------------------
# grid oracle for the LSS minimum


@lru_cache(maxsize=8)
def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All points of the simplex with coordinates in ``(1/resolution) Z``."""
    if n == 1:
        return np.ones((1, 1))
    rows = np.zeros((1, 0), dtype=np.int64)
    for _ in range(n - 1):
        used = rows.sum(1)
        counts = resolution - used + 1
        rep = np.repeat(rows, counts, axis=0)
        start = np.repeat(np.cumsum(counts) - counts, counts)
        step = np.arange(len(rep)) - start
        rows = np.hstack([rep, step[:, None]])
    last = resolution - rows.sum(1)
    return np.hstack([rows, last[:, None]]).astype(float) / resolution


def oracle_lss_grid(A, resolution: int = 200) -> float:
    """Brute-force minimum of ``lambda^T A lambda`` over the barycentric grid."""
    A = np.asarray(A, dtype=float)
    if resolution < 10:
        raise BadParams("resolution must be at least 10")
    G = simplex_grid(A.shape[0], resolution)
    return float(((G @ A) * G).sum(1).min())


# ---------------------------------------------------------------------------
# samplers of nonnegatively curved spaces


FAMILIES = ("sphere", "flat_torus", "euclidean", "circle", "doubled_polygon")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator, so seeds can be split without overlap."""
    return np.random.Generator(np.random.Philox(int(seed)))


def random_convex_polygon(rng, k: int = 6) -> np.ndarray:
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=k))
    while np.diff(np.r_[angles, angles[0] + 2 * np.pi]).max() >= np.pi:
        angles = np.sort(rng.uniform(0, 2 * np.pi, size=k))
    return np.c_[np.cos(angles), np.sin(angles)]


def polygon_doubling_distance(poly: np.ndarray, a, sa: int, b, sb: int) -> float:
    """Distance in the doubling of a convex polygon (sheets ``sa``, ``sb``)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if sa == sb:
        return float(np.linalg.norm(a - b))
    best = math.inf
    for i in range(len(poly)):
        o, e = poly[i], poly[(i + 1) % len(poly)] - poly[i]
        L = float(np.linalg.norm(e))
        best = min(best, detour_via_segment(a, b, o, e / L, 0.0, L))
    return best


def _labels(n):
    return list("abcde")[:n] if n <= 5 else [f"x{i}" for i in range(n)]


def sample_metric(family: str, params: dict | None = None, seed: int = 0, n: int = 5) -> FiniteMetric:
    """Five points of a nonnegatively curved space with its intrinsic distance.

    Families and parameters: ``sphere`` (``radius``), ``flat_torus``
    (``periods``), ``euclidean`` (``dim``), ``circle`` (``length``,
    ``tense``: consecutive arcs short enough for the cyclic tense
    configuration) and ``doubled_polygon`` (``vertices``).
    """
    params = dict(params or {})
    rng = make_rng(seed)
    labels = _labels(n)
    if family == "sphere":
        r = float(params.get("radius", 1.0))
        if r <= 0:
            raise BadParams("radius must be positive")
        U = rng.normal(size=(n, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        D = np.array([[r * math.atan2(np.linalg.norm(np.cross(u, v)), u @ v) for v in U] for u in U])
    elif family == "flat_torus":
        a, b = map(float, params.get("periods", (1.0, 1.0)))
        if a <= 0 or b <= 0:
            raise BadParams("periods must be positive")
        X = rng.uniform(0, 1, size=(n, 2)) * [a, b]
        dx = np.abs(X[:, None, 0] - X[None, :, 0])
        dy = np.abs(X[:, None, 1] - X[None, :, 1])
        D = np.hypot(np.minimum(dx, a - dx), np.minimum(dy, b - dy))
    elif family == "euclidean":
        k = int(params.get("dim", 3))
        if k < 1:
            raise BadParams("dim must be positive")
        X = rng.normal(size=(n, k))
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    elif family == "circle":
        ell = float(params.get("length", 1.0))
        if ell <= 0:
            raise BadParams("length must be positive")
        tense = bool(params.get("tense", True))
        for _ in range(10000):
            gaps = rng.dirichlet(np.ones(n)) * ell
            if not tense or all(gaps[i] + gaps[(i + 1) % n] <= ell / 2 for i in range(n)):
                break
        else:  # pragma: no cover
            raise BadParams("could not sample tense gaps")
        pos = np.concatenate([[0.0], np.cumsum(gaps[:-1])]) + rng.uniform(0, ell)
        pos = pos % ell
        pos = pos[rng.permutation(n)]
        D = np.array([[circle_distance(ell, u, v) for v in pos] for u in pos])
    elif family == "doubled_polygon":
        k = int(params.get("vertices", 6))
        if k < 3:
            raise BadParams("a polygon needs at least 3 vertices")
        poly = random_convex_polygon(rng, k)
        pts = []
        while len(pts) < n:
            y = rng.uniform(-1, 1, size=2)
            inside = all(cross2(poly[(i + 1) % k] - poly[i], y - poly[i]) >= 0 for i in range(k))
            if inside:
                pts.append(y)
        sheets = rng.integers(0, 2, size=n)
        D = np.array([[polygon_doubling_distance(poly, pts[i], sheets[i], pts[j], sheets[j]) if i != j else 0.0
                       for j in range(n)] for i in range(n)])
    else:
        raise BadParams(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return validate_metric(labels, D.tolist())
