"""Embedding certificates for 5-point metrics satisfying the LSS inequalities.

:func:`embed` routes a metric to the first construction that applies:
Euclidean coordinates when the associated form is positive semidefinite,
a doubled polytope around a four-point tense set, a circle for the cyclic
tense configuration, or a cone disc around two tense triples with a common
center.
"""
from __future__ import annotations

from ..classify import find_shared_center, match_configuration
from ..comparison import lss_all, tense_structure
from ..metric import FiniteMetric
from .certificates import (
    SCHEMA,
    CertificateError,
    CircleCert,
    ConeDiscCert,
    ConeTriangle,
    DoubledPolytopeCert,
    EuclideanCert,
    Halfspace,
    ProductCert,
    dump,
    dumps,
    load,
)
from .cone import cone_disc_conditions, embed_cone_disc, realize_cone_triangle
from .errors import (
    ApexOutside,
    ConditionGroupFailed,
    ConeTriangleError,
    DecompositionMismatch,
    EmbedError,
    InfeasibleArcs,
    InfeasibleBalls,
    LssFails,
    NotConstructive,
    NotCyclic,
    NotPSD,
    ThetaInfeasible,
)
from .euclidean import embed_circle, embed_euclidean
from .polytope import embed_doubled_polytope
from .product import assemble_product

__all__ = [
    "embed", "embed_euclidean", "embed_circle", "embed_cone_disc", "embed_doubled_polytope",
    "realize_cone_triangle", "assemble_product", "cone_disc_conditions", "SCHEMA", "dump", "dumps", "load",
    "EuclideanCert", "CircleCert", "ConeDiscCert", "ConeTriangle", "DoubledPolytopeCert", "Halfspace",
    "ProductCert", "CertificateError", "EmbedError", "NotPSD", "NotCyclic", "ThetaInfeasible",
    "ConditionGroupFailed", "ConeTriangleError", "ApexOutside", "InfeasibleArcs", "InfeasibleBalls",
    "DecompositionMismatch", "NotConstructive", "LssFails",
]


def embed(m: FiniteMetric, seed: int = 0, tol: float = 1e-6):
    """Certificate for ``m``, verified before it is returned.

    Raises :class:`LssFails` with the worst witness when an LSS inequality
    fails and :class:`NotConstructive` when none of the constructions
    applies (the metric then lies strictly inside the cone of LSS metrics
    and is not handled).
    """
    from ..verify import verify_certificate

    summary = lss_all(m)
    if not summary.holds:
        raise LssFails(summary.witness)
    tried = []

    def accept(cert):
        rep = verify_certificate(m, cert, tol)
        if rep.passed:
            return cert
        tried.append(f"{cert.kind}: verification failed (max relative error {rep.max_rel:.3g})")
        return None

    try:
        cert = accept(embed_euclidean(m))
        if cert is not None:
            return cert
    except EmbedError as exc:
        tried.append(f"Euclidean: {exc}")
    if m.n != 5:
        raise NotConstructive("; ".join(tried))

    ts = tense_structure(m)
    for quad in ts.quads:
        try:
            cert = accept(embed_doubled_polytope(m, quad, seed=seed))
            if cert is not None:
                return cert
        except EmbedError as exc:
            tried.append(f"DoubledPolytope {quad.word()}: {exc}")
    triples = [t for t in ts.triples if not t.degenerate]
    match = match_configuration(m.labels, triples)
    if match.kind == "Cyclic":
        try:
            cert = accept(embed_circle(m, match.order))
            if cert is not None:
                return cert
        except EmbedError as exc:
            tried.append(f"Circle: {exc}")
    shared = match.shared if match.kind == "SharedCenter" else find_shared_center(triples)
    if shared is not None:
        try:
            cert = accept(embed_cone_disc(m, shared))
            if cert is not None:
                return cert
        except EmbedError as exc:
            tried.append(f"ConeDisc: {exc}")
    tried.append(f"tense configuration: {match.kind}")
    raise NotConstructive("; ".join(tried))
