"""Named example metrics and random instance generators.

Generators take a :class:`numpy.random.Generator` and retry until the
instance has the requested structure, so a seed fixes the output.
"""
from __future__ import annotations

import math

import numpy as np

from .comparison import lss_all, tense_array
from .metric import FiniteMetric, MetricError, metric_from_points, validate_metric

LABELS = list("abcde")


def star_metric() -> FiniteMetric:
    """Center ``p`` with four leaves at distance 1, leaves pairwise 2 apart (fails LSS)."""
    labels = ["p", "a", "b", "c", "d"]
    D = np.full((5, 5), 2.0)
    D[0, :] = D[:, 0] = 1.0
    np.fill_diagonal(D, 0.0)
    return validate_metric(labels, D.tolist())


def circle_metric(n: int = 5, length: float = 5.0, labels=None) -> FiniteMetric:
    """``n`` equally spaced points on a circle of the given length."""
    labels = list(labels or LABELS[:n])
    pos = np.arange(n) * length / n
    t = np.abs(pos[:, None] - pos[None, :]) % length
    return validate_metric(labels, np.minimum(t, length - t).tolist())


def equilateral_metric(n: int = 5, side: float = 1.0) -> FiniteMetric:
    D = np.full((n, n), side)
    np.fill_diagonal(D, 0.0)
    return validate_metric(LABELS[:n], D.tolist())


def line_metric(n: int = 5) -> FiniteMetric:
    """Points ``0, 1, ..., n-1`` on a line."""
    x = np.arange(n, dtype=float)
    return validate_metric(LABELS[:n], np.abs(x[:, None] - x[None, :]).tolist())


def random_metric(rng: np.random.Generator, n: int = 5) -> FiniteMetric:
    """A mixture of metric families, some satisfying LSS and some not.

    A third are Euclidean point sets with distances shrunk or stretched by
    up to 30% (kept when still a metric), a third have independent
    distances in ``[1, 2]``, which always satisfy the triangle inequality,
    and a third are perturbed stars (the first point near all others, which
    are far apart), which often fail LSS.
    """
    while True:
        u = rng.uniform()
        if u < 1 / 3:
            X = rng.normal(size=(n, 3))
            D = np.linalg.norm(X[:, None] - X[None], axis=-1)
            F = rng.uniform(0.7, 1.3, size=(n, n))
            D = D * np.triu(F, 1)
            D = D + D.T
        elif u < 2 / 3:
            D = np.triu(rng.uniform(1.0, 2.0, size=(n, n)), 1)
            D = D + D.T
        else:
            D = np.triu(rng.uniform(1.5, 2.0, size=(n, n)), 1)
            D[0, 1:] = rng.uniform(0.8, 1.2, size=n - 1)
            D = D + D.T
        try:
            return validate_metric(LABELS[:n], D.tolist())
        except MetricError:
            continue


def random_form(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    """Symmetric matrix; half come from random metrics, half have normal entries."""
    if rng.uniform() < 0.5:
        from .comparison import lss_matrix

        m = random_metric(rng, n + 1)
        return lss_matrix(m, m.labels[0], m.labels[1:])
    A = rng.normal(size=(n, n))
    return 0.5 * (A + A.T)


def circle_instance(rng: np.random.Generator) -> tuple[FiniteMetric, tuple]:
    """Five points on a circle in the cyclic tense configuration, labels shuffled.

    Returns the metric and its cyclic order.
    """
    length = float(rng.uniform(1.0, 10.0))
    while True:
        gaps = rng.dirichlet(np.ones(5)) * length
        if all(gaps[i] + gaps[(i + 1) % 5] < 0.5 * length for i in range(5)) and gaps.min() > 1e-3 * length:
            break
    pos = np.concatenate([[0.0], np.cumsum(gaps[:-1])])
    order = [LABELS[i] for i in rng.permutation(5)]
    D = np.zeros((5, 5))
    idx = {lab: k for k, lab in enumerate(LABELS)}
    for i in range(5):
        for j in range(5):
            t = abs(pos[i] - pos[j])
            D[idx[order[i]], idx[order[j]]] = min(t, length - t)
    return validate_metric(LABELS, D.tolist()), tuple(order)


def four_tense_instance(rng: np.random.Generator, shrink=(0.85, 1.0)):
    """A metric with the tense array ``p; a b c`` and a fifth point ``q``.

    ``p`` sits inside a triangle ``a b c`` of the plane and ``q`` above it
    in space; the distances from ``q`` to ``a, b, c`` are then shrunk by
    random factors.  Returns the metric and its tense array.
    """
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, 3))
        if np.diff(np.r_[ang, ang[0] + 2 * np.pi]).max() >= np.pi:
            continue
        X = np.c_[np.cos(ang), np.sin(ang)] * rng.uniform(0.6, 1.6, size=(3, 1))
        q = np.r_[rng.normal(size=2) * 0.5, rng.uniform(0.3, 1.5)]
        P = np.vstack([np.zeros(3), np.c_[X, np.zeros(3)], q])
        D = np.linalg.norm(P[:, None] - P[None], axis=-1)
        for i in (1, 2, 3):
            D[i, 4] = D[4, i] = D[i, 4] * rng.uniform(*shrink)
        try:
            m = validate_metric(["p", "a", "b", "c", "q"], D.tolist())
        except MetricError:
            continue
        if not lss_all(m).holds:
            continue
        t = tense_array(m, "p", ("a", "b", "c"))
        if t is not None:
            return m, t


def shared_center_instance(rng: np.random.Generator, shrink=(0.85, 1.0)):
    """A metric with tense triples ``v1 x v2`` and ``w1 x w2``.

    The five points start as two crossing segments of the plane through
    ``x``; the four cross distances ``d(v_i, w_j)`` are then shrunk.
    Returns the metric and the roles.
    """
    while True:
        th = rng.uniform(0.3, 2.8)
        r = rng.uniform(0.5, 2.0, size=4)
        u = np.array([math.cos(th), math.sin(th)])
        P = np.array([[0.0, 0.0], [-r[0], 0.0], [r[1], 0.0], r[2] * u, -r[3] * u])
        D = np.linalg.norm(P[:, None] - P[None], axis=-1)
        for i in (1, 2):
            for j in (3, 4):
                D[i, j] = D[j, i] = D[i, j] * rng.uniform(*shrink)
        labels = ["x", "a", "b", "c", "d"]
        try:
            m = validate_metric(labels, D.tolist())
        except MetricError:
            continue
        if lss_all(m).holds:
            return m, dict(zip(["x", "v1", "v2", "w1", "w2"], labels))


def mixture_metric(weights=(0.5, 0.5), length: float = 5.0, seed: int = 0):
    """``d^2 = t_1 d_circle^2 + t_2 d_euclid^2`` for equally spaced circle points and a random set in ``R^3``.

    Returns the metric and both factor metrics.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    circ = circle_metric(5, length)
    euc = metric_from_points(rng.normal(size=(5, 3)), LABELS)
    D2 = weights[0] * circ.matrix ** 2 + weights[1] * euc.matrix ** 2
    return validate_metric(LABELS, np.sqrt(D2).tolist()), circ, euc
