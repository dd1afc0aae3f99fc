"""Products of rescaled certificates."""
from __future__ import annotations

import itertools

from ..comparison import TAU_CFG
from ..metric import FiniteMetric
from .certificates import ProductCert
from .errors import DecompositionMismatch, EmbedError


def assemble_product(certs, m: FiniteMetric, tol: float = TAU_CFG) -> ProductCert:
    """Product of factors ``(t_k, certificate)`` realising ``d^2 = sum_k t_k d_k^2``.

    Each factor is scaled by ``sqrt(t_k)``; a product of nonnegatively
    curved spaces is again nonnegatively curved.
    """
    from ..verify import certificate_distances

    certs = [(float(w), c) for w, c in certs]
    if not certs:
        raise EmbedError("empty product")
    if any(w < 0 for w, _ in certs):
        raise EmbedError("weights must be nonnegative")
    labels = list(m.labels)
    sq = sum(w * certificate_distances(c, labels) ** 2 for w, c in certs)
    D2 = m.matrix ** 2
    scale2 = m.scale() ** 2
    worst, pair = 0.0, None
    for i, j in itertools.combinations(range(m.n), 2):
        r = abs(sq[i, j] - D2[i, j])
        if r > worst:
            worst, pair = r, (labels[i], labels[j])
    if worst > tol * scale2:
        raise DecompositionMismatch(pair, worst)
    return ProductCert(certs)
