"""Finite metric spaces, relabelings and the associated quadratic form.

Simplex convention shared by every module: for an ordered array
``x_1..x_n`` the vertices ``v_1..v_{n-1}`` are the standard basis of
``R^{n-1}`` and ``v_n = 0``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

TAU_METRIC = 1e-9
TAU_FORM = 1e-10
TAU_PSD = 1e-8


class MetricError(ValueError):
    """Raised by :func:`validate_metric`; ``violations`` lists every problem."""

    def __init__(self, violations: list[tuple]):
        self.violations = violations
        super().__init__("; ".join(_fmt_violation(v) for v in violations))


def _fmt_violation(v: tuple) -> str:
    kind, *rest = v
    return f"{kind}({', '.join(map(str, rest))})"


class BadPermutation(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMetric:
    labels: tuple[str, ...]
    d: tuple[tuple[float, ...], ...]
    mode: str = "metric"
    exact: tuple[tuple[Fraction, ...], ...] | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.d, dtype=float)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def dist(self, a: str, b: str) -> float:
        return self.d[self.index(a)][self.index(b)]

    def exact_dist(self, a: str, b: str) -> Fraction:
        if self.exact is None:
            raise ValueError("metric has no exact distances")
        return self.exact[self.index(a)][self.index(b)]

    @property
    def diameter(self) -> float:
        return max((max(row) for row in self.d), default=0.0)

    def scale(self) -> float:
        """Length scale for relative tolerances (1 for the zero metric)."""
        return self.diameter or 1.0

    def submetric(self, labels: Sequence[str]) -> "FiniteMetric":
        idx = [self.index(a) for a in labels]
        d = tuple(tuple(self.d[i][j] for j in idx) for i in idx)
        ex = None if self.exact is None else tuple(tuple(self.exact[i][j] for j in idx) for i in idx)
        return FiniteMetric(tuple(labels), d, self.mode, ex)

    def scaled(self, c: float) -> "FiniteMetric":
        d = tuple(tuple(c * x for x in row) for row in self.d)
        return FiniteMetric(self.labels, d, self.mode)

    def to_json(self) -> dict:
        out = {"labels": list(self.labels), "d": [list(r) for r in self.d], "mode": self.mode}
        if self.exact is not None:
            out["exact"] = [[str(x) for x in r] for r in self.exact]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _as_fraction(x) -> Fraction:
    # floats go through repr so that 0.1 means 1/10, not its binary expansion
    if isinstance(x, (Fraction, int, str)):
        return Fraction(x)
    return Fraction(repr(float(x)))


def validate_metric(labels: Sequence[str], raw, mode: str = "metric", exact: bool = False,
                    tol: float = TAU_METRIC) -> FiniteMetric:
    """Check a labeled square matrix and return a :class:`FiniteMetric`.

    Every violated constraint is collected and reported together through
    :class:`MetricError`.  ``mode="semimetric"`` skips only the triangle
    inequality.  With ``exact=True`` the entries are also kept as fractions
    (strings like ``"3/2"`` are accepted) and the checks are exact.
    """
    if mode not in ("metric", "semimetric"):
        raise ValueError(f"unknown mode {mode!r}")
    labels = tuple(str(a) for a in labels)
    rows = [list(r) for r in raw]
    n = len(labels)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise MetricError([("NonSquare", n, [len(r) for r in rows])])
    if len(set(labels)) != n:
        raise MetricError([("DuplicateLabel", labels)])

    if exact:
        vals = [[_as_fraction(x) for x in r] for r in rows]
        zero, slack = Fraction(0), Fraction(0)
    else:
        vals = [[float(x) for x in r] for r in rows]
        zero = 0.0
        big = max((abs(x) for r in vals for x in r), default=0.0)
        slack = tol * (big or 1.0)

    bad: list[tuple] = []
    for i in range(n):
        if vals[i][i] != zero:
            bad.append(("NonzeroDiagonal", labels[i], vals[i][i]))
        for j in range(n):
            if vals[i][j] < zero:
                bad.append(("NegativeDistance", labels[i], labels[j], vals[i][j]))
            if j > i and vals[i][j] != vals[j][i]:
                bad.append(("Asymmetric", labels[i], labels[j]))
            if not exact and not np.isfinite(vals[i][j]):
                bad.append(("NonFinite", labels[i], labels[j]))
    if mode == "metric" and not bad:
        for i, j, k in itertools.permutations(range(n), 3):
            if i < k and vals[i][k] > vals[i][j] + vals[j][k] + slack:
                bad.append(("TriangleViolation", labels[i], labels[j], labels[k]))
    if bad:
        raise MetricError(bad)

    d = tuple(tuple(float(x) for x in r) for r in vals)
    ex = tuple(tuple(r) for r in vals) if exact else None
    return FiniteMetric(labels, d, mode, ex)


def from_json(obj) -> FiniteMetric:
    """Parse ``{"labels": [...], "d": [[...]], "mode": "metric"}`` (dict or text)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "labels" not in obj or "d" not in obj:
        raise MetricError([("BadJSON", "expected keys 'labels' and 'd'")])
    if "exact" in obj:
        return validate_metric(obj["labels"], obj["exact"], obj.get("mode", "metric"), exact=True)
    return validate_metric(obj["labels"], obj["d"], obj.get("mode", "metric"))


def metric_from_points(points, labels: Sequence[str] | None = None) -> FiniteMetric:
    pts = np.asarray(points, dtype=float)
    if labels is None:
        labels = "abcde"[: len(pts)] if len(pts) <= 5 else [f"x{i}" for i in range(len(pts))]
    diff = pts[:, None, :] - pts[None, :, :]
    return validate_metric(labels, np.sqrt((diff ** 2).sum(-1)).tolist())


def relabel(m: FiniteMetric, sigma) -> FiniteMetric:
    """Reindex ``m`` so that new point ``k`` is old point ``sigma[k]``.

    ``sigma`` is a sequence of indices or of labels.  The label list is kept,
    so ``relabel(m, s)`` has ``d'(labels[k], labels[l]) = d(sigma[k], sigma[l])``.
    """
    idx = _perm_indices(m, sigma)
    d = tuple(tuple(m.d[idx[i]][idx[j]] for j in range(m.n)) for i in range(m.n))
    ex = None
    if m.exact is not None:
        ex = tuple(tuple(m.exact[idx[i]][idx[j]] for j in range(m.n)) for i in range(m.n))
    return FiniteMetric(m.labels, d, m.mode, ex)


def inverse_permutation(sigma: Sequence[int]) -> list[int]:
    inv = [0] * len(sigma)
    for k, s in enumerate(sigma):
        inv[s] = k
    return inv


def _perm_indices(m: FiniteMetric, sigma) -> list[int]:
    sigma = list(sigma)
    if sigma and isinstance(sigma[0], str):
        try:
            sigma = [m.index(a) for a in sigma]
        except ValueError as exc:
            raise BadPermutation(str(exc)) from None
    if sorted(sigma) != list(range(m.n)):
        raise BadPermutation(f"{sigma} is not a permutation of {m.n} points")
    return sigma


@dataclass(frozen=True)
class QuadraticForm:
    """Form ``v -> v^T M v``; ``M`` is stored as its upper triangle."""

    n: int
    upper: tuple[float, ...]

    @classmethod
    def from_matrix(cls, M) -> "QuadraticForm":
        M = np.asarray(M, dtype=float)
        k = M.shape[0]
        iu = np.triu_indices(k)
        sym = (M + M.T) / 2
        return cls(k, tuple(float(x) for x in sym[iu]))

    @property
    def M(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n)
        out[iu] = self.upper
        out.T[iu] = self.upper
        return out

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.M @ v)

    def eigenfloor(self) -> float:
        if self.n == 0:
            return 0.0
        return float(np.linalg.eigvalsh(self.M)[0])

    def is_psd(self, tol: float = TAU_PSD) -> bool:
        scale = max((abs(x) for x in self.upper), default=0.0)
        return self.eigenfloor() >= -tol * (scale or 1.0)


def simplex_vertices(n: int) -> np.ndarray:
    """``v_1..v_n`` as rows: standard basis of ``R^{n-1}`` then the origin."""
    return np.vstack([np.eye(n - 1), np.zeros((1, n - 1))])


def associated_form(m: FiniteMetric, ordering=None) -> QuadraticForm:
    """Form ``W`` on ``R^{n-1}`` with ``W(v_i - v_j) = d(x_i, x_j)^2``.

    ``ordering`` (indices or labels) lists the points as ``x_1..x_n``;
    ``M[i][j] = (d[i][n]^2 + d[j][n]^2 - d[i][j]^2) / 2``.
    """
    idx = list(range(m.n)) if ordering is None else _perm_indices(m, ordering)
    D2 = m.matrix[np.ix_(idx, idx)] ** 2
    last = D2[-1, :-1]
    M = (last[:, None] + last[None, :] - D2[:-1, :-1]) / 2
    return QuadraticForm.from_matrix(M)


def form_to_squared_distances(W: QuadraticForm) -> np.ndarray:
    """Inverse of :func:`associated_form`: the matrix of ``W(v_i - v_j)``."""
    V = simplex_vertices(W.n + 1)
    diff = V[:, None, :] - V[None, :, :]
    return np.einsum("ijk,kl,ijl->ij", diff, W.M, diff)


class CoefficientSumNonzero(ValueError):
    pass


def in_cone_Kn(beta, tol: float = TAU_FORM) -> bool:
    """Membership of a barycentric-difference direction in the cone ``K_n``.

    ``K_n`` is the union of lines joining a facet point of the simplex to
    the opposite vertex; such a direction has at most one positive or at
    most one negative coefficient.
    """
    beta = np.asarray(beta, dtype=float)
    scale = float(np.abs(beta).max()) if beta.size else 0.0
    if abs(beta.sum()) > tol * max(scale, 1.0):
        raise CoefficientSumNonzero(f"coefficients sum to {beta.sum()}")
    eps = tol * max(scale, 1.0)
    pos = int((beta > eps).sum())
    neg = int((beta < -eps).sum())
    return pos <= 1 or neg <= 1


def simplex_vector_to_point(beta) -> np.ndarray:
    """``sum beta_i v_i`` in ``R^{n-1}``."""
    beta = np.asarray(beta, dtype=float)
    return beta[:-1].copy()
