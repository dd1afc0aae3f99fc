"""Euclidean and circle certificates."""
from __future__ import annotations

import numpy as np

from ..comparison import TAU_CFG, TAU_TENSE
from ..metric import TAU_PSD, FiniteMetric, associated_form
from .certificates import CircleCert, EuclideanCert
from .errors import EmbedError, NotCyclic, NotPSD


def embed_euclidean(m: FiniteMetric, dim: int = 4) -> EuclideanCert:
    """Coordinates in ``R^dim`` from a factorization of the associated form.

    The last point sits at the origin; the form's matrix is then the Gram
    matrix of the others.
    """
    W = associated_form(m)
    M = W.M
    scale = float(np.abs(M).max()) if M.size else 0.0
    w, V = np.linalg.eigh(M) if M.size else (np.zeros(0), np.zeros((0, 0)))
    if w.size and w[0] < -TAU_PSD * (scale or 1.0):
        raise NotPSD(w[0], V[:, 0])
    keep = w > TAU_PSD * (scale or 1.0) * 1e-4
    Y = V[:, keep] * np.sqrt(w[keep])
    if Y.shape[1] > dim:
        raise EmbedError(f"needs {Y.shape[1]} dimensions")
    pts = np.zeros((m.n, dim))
    pts[: m.n - 1, : Y.shape[1]] = Y
    D = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    err = float(np.abs(D - m.matrix).max())
    if err > TAU_CFG * m.scale():
        raise EmbedError(f"factorization misses distances by {err:.3g}")
    return EuclideanCert({lab: pts[i] for i, lab in enumerate(m.labels)})


def embed_circle(m: FiniteMetric, order) -> CircleCert:
    """Place the points on a circle whose length is the cyclic perimeter.

    ``order`` must make every consecutive triple tense.
    """
    order = list(order)
    n = len(order)
    slack = TAU_TENSE * m.scale()
    for i in range(n):
        a, b, c = order[i - 1], order[i], order[(i + 1) % n]
        gap = m.dist(a, b) + m.dist(b, c) - m.dist(a, c)
        if abs(gap) > slack:
            raise NotCyclic(i, gap)
    steps = [m.dist(order[i], order[(i + 1) % n]) for i in range(n)]
    length = float(sum(steps))
    if length <= 0:
        raise EmbedError("all points coincide")
    pos = np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return CircleCert(length, {lab: float(p) for lab, p in zip(order, pos)})
