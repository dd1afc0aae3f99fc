"""Embedding certificates and their JSON form.

Every certificate records where each label of the metric goes in a concrete
nonnegatively curved model space; the oracles in :mod:`fivepoint.verify`
recompute the induced distances independently.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SCHEMA = "fivepoint.certificate/1"


class CertificateError(ValueError):
    pass


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass
class EuclideanCert:
    coords: dict  # label -> point in R^4

    kind = "Euclidean"

    @property
    def labels(self):
        return list(self.coords)

    def to_json(self) -> dict:
        return {"coords": {k: _arr(v).tolist() for k, v in self.coords.items()}}

    @classmethod
    def from_json(cls, obj):
        return cls({k: _arr(v) for k, v in obj["coords"].items()})


@dataclass
class CircleCert:
    length: float
    positions: dict  # label -> position in [0, length)

    kind = "Circle"

    @property
    def labels(self):
        return list(self.positions)

    def to_json(self) -> dict:
        return {"length": self.length, "positions": dict(self.positions)}

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["length"]), {k: float(v) for k, v in obj["positions"].items()})


@dataclass
class ConeTriangle:
    """Solid geodesic triangle in a flat cone, stored as an unfolded chart.

    The chart is the pentagon ``P, Q, R2, z, R1``: side ``PQ`` has length
    ``c``, ``R1`` and ``R2`` are the two copies of the third vertex and the
    cone point ``z`` is joined to both by the (glued) cut edges.  Corner
    angles ``A, B, C`` sit at ``P, Q, R``; ``omega = 3 pi - (A + B + C)`` is
    the total angle at ``z``.  A flat triangle has ``z = None``.
    """

    vertices: tuple  # labels at P, Q, R
    sides: tuple  # (a, b, c) = (|QR|, |PR|, |PQ|)
    angles: tuple  # (A, B, C)
    omega: float
    P: np.ndarray
    Q: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    z: np.ndarray | None

    @property
    def flat(self) -> bool:
        return self.z is None

    def pieces(self, tag: str) -> list[tuple[tuple[str, str, str], np.ndarray]]:
        """Flat triangles (names, chart coordinates) tiling the cone triangle."""
        p, q, r = self.vertices
        if self.z is None:
            return [((p, q, r), np.array([self.P, self.Q, self.R1]))]
        return [((tag, p, q), np.array([self.z, self.P, self.Q])),
                ((tag, q, r), np.array([self.z, self.Q, self.R2])),
                ((tag, r, p), np.array([self.z, self.R1, self.P]))]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "sides": list(self.sides), "angles": list(self.angles),
                "omega": self.omega, "P": self.P.tolist(), "Q": self.Q.tolist(), "R1": self.R1.tolist(),
                "R2": self.R2.tolist(), "z": None if self.z is None else self.z.tolist()}

    @classmethod
    def from_json(cls, o):
        return cls(tuple(o["vertices"]), tuple(o["sides"]), tuple(o["angles"]), float(o["omega"]),
                   _arr(o["P"]), _arr(o["Q"]), _arr(o["R1"]), _arr(o["R2"]),
                   None if o["z"] is None else _arr(o["z"]))


@dataclass
class ConeDiscCert:
    roles: dict  # "x", "v1", "v2", "w1", "w2" -> label
    planar: dict  # role -> point in R^2 (the comparison configuration)
    auxiliary: dict  # "v11", ..., "w22" -> point in R^2
    theta: float
    angles: dict  # "<triangle>@<vertex role>" -> angle
    triangles: list  # four ConeTriangle

    kind = "ConeDisc"

    @property
    def labels(self):
        return [self.roles[r] for r in ("x", "v1", "v2", "w1", "w2")]

    def to_json(self) -> dict:
        return {"roles": dict(self.roles), "planar": {k: _arr(v).tolist() for k, v in self.planar.items()},
                "auxiliary": {k: _arr(v).tolist() for k, v in self.auxiliary.items()},
                "theta": self.theta, "angles": dict(self.angles),
                "triangles": [t.to_json() for t in self.triangles]}

    @classmethod
    def from_json(cls, o):
        return cls(dict(o["roles"]), {k: _arr(v) for k, v in o["planar"].items()},
                   {k: _arr(v) for k, v in o["auxiliary"].items()}, float(o["theta"]), dict(o["angles"]),
                   [ConeTriangle.from_json(t) for t in o["triangles"]])


@dataclass
class Halfspace:
    normal: np.ndarray  # unit normal
    offset: float  # region is normal . y <= offset

    def value(self, y) -> float:
        return float(self.normal @ _arr(y) - self.offset)

    def reflect(self, y) -> np.ndarray:
        y = _arr(y)
        return y - 2.0 * self.value(y) * self.normal


@dataclass
class DoubledPolytopeCert:
    roles: dict  # "p", "q", "x1", "x2", "x3" -> label
    halfspaces: list  # Halfspace; V is their intersection
    sheet1: dict  # label -> point of V (p, x1, x2, x3)
    sheet2: dict  # label -> point of V (q, placed at s~)
    mirrors: dict  # "q", "q1", "q2", "q3" -> reflected point defining each facet
    general_position: bool = True
    attempts: int = 1

    kind = "DoubledPolytope"

    @property
    def labels(self):
        return list(self.sheet1) + list(self.sheet2)

    def placement(self, label):
        if label in self.sheet1:
            return 1, _arr(self.sheet1[label])
        return 2, _arr(self.sheet2[label])

    def to_json(self) -> dict:
        return {"roles": dict(self.roles),
                "halfspaces": [{"normal": h.normal.tolist(), "offset": h.offset} for h in self.halfspaces],
                "sheet1": {k: _arr(v).tolist() for k, v in self.sheet1.items()},
                "sheet2": {k: _arr(v).tolist() for k, v in self.sheet2.items()},
                "mirrors": {k: _arr(v).tolist() for k, v in self.mirrors.items()},
                "general_position": self.general_position, "attempts": self.attempts}

    @classmethod
    def from_json(cls, o):
        return cls(dict(o["roles"]), [Halfspace(_arr(h["normal"]), float(h["offset"])) for h in o["halfspaces"]],
                   {k: _arr(v) for k, v in o["sheet1"].items()}, {k: _arr(v) for k, v in o["sheet2"].items()},
                   {k: _arr(v) for k, v in o["mirrors"].items()}, bool(o.get("general_position", True)),
                   int(o.get("attempts", 1)))

    def to_off(self, pad: float | None = None) -> str:
        """OFF mesh of ``V`` (clipped to a bounding box when unbounded)."""
        from scipy.spatial import ConvexHull, HalfspaceIntersection

        pts = np.array(list(self.sheet1.values()) + list(self.sheet2.values()))
        lo, hi = pts.min(0), pts.max(0)
        if pad is None:
            pad = max(float((hi - lo).max()), 1.0)
        hs = [np.append(h.normal, -h.offset) for h in self.halfspaces]
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            hs.append(np.append(e, -(hi[k] + pad)))
            hs.append(np.append(-e, lo[k] - pad))
        interior = _interior_point(np.array(hs))
        verts = HalfspaceIntersection(np.array(hs), interior).intersections
        hull = ConvexHull(verts)
        lines = ["OFF", f"{len(verts)} {len(hull.simplices)} 0"]
        lines += [" ".join(f"{c:.12g}" for c in v) for v in verts]
        lines += ["3 " + " ".join(map(str, f)) for f in hull.simplices]
        return "\n".join(lines) + "\n"


def _interior_point(hs: np.ndarray) -> np.ndarray:
    """Chebyshev center of ``{y : A y + b <= 0}`` by linear programming."""
    from scipy.optimize import linprog

    A, b = hs[:, :-1], hs[:, -1]
    norms = np.linalg.norm(A, axis=1)
    res = linprog(np.r_[np.zeros(3), -1.0], A_ub=np.c_[A, norms], b_ub=-b,
                  bounds=[(None, None)] * 3 + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        raise CertificateError("polytope has empty interior")
    return res.x[:3]


@dataclass
class ProductCert:
    factors: list  # (weight, certificate)

    kind = "Product"

    @property
    def labels(self):
        return self.factors[0][1].labels if self.factors else []

    def to_json(self) -> dict:
        return {"factors": [{"weight": w, "certificate": dump(c)} for w, c in self.factors]}

    @classmethod
    def from_json(cls, o):
        return cls([(float(f["weight"]), load(f["certificate"])) for f in o["factors"]])


KINDS = {c.kind: c for c in (EuclideanCert, CircleCert, ConeDiscCert, DoubledPolytopeCert, ProductCert)}


def dump(cert) -> dict:
    return {"schema": SCHEMA, "kind": cert.kind, **cert.to_json()}


def dumps(cert, **kw) -> str:
    return json.dumps(dump(cert), **kw)


def load(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    if obj.get("schema") != SCHEMA:
        raise CertificateError(f"unsupported certificate schema {obj.get('schema')!r}")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise CertificateError(f"unknown certificate kind {kind!r}")
    return KINDS[kind].from_json(obj)
