import math

import numpy as np
import pytest

from fivepoint.embed import (
    CircleCert,
    ConeTriangleError,
    DecompositionMismatch,
    DoubledPolytopeCert,
    EuclideanCert,
    LssFails,
    NotConstructive,
    NotCyclic,
    NotPSD,
    ProductCert,
    assemble_product,
    dumps,
    embed,
    embed_circle,
    embed_cone_disc,
    embed_doubled_polytope,
    embed_euclidean,
    load,
    realize_cone_triangle,
)
from fivepoint.embed.certificates import CertificateError
from fivepoint.embed.cone import check_cone_triangle, failed_conditions
from fivepoint.embed.polytope import edge_clearance
from fivepoint.generators import (
    circle_instance,
    circle_metric,
    equilateral_metric,
    four_tense_instance,
    mixture_metric,
    shared_center_instance,
    star_metric,
)
from fivepoint.metric import metric_from_points, relabel
from fivepoint.verify import certificate_distances, verify_certificate


def _dist_error(m, cert):
    return float(np.abs(certificate_distances(cert, list(m.labels)) - m.matrix).max())


def test_euclidean():
    m = metric_from_points(np.random.default_rng(0).normal(size=(5, 4)))
    cert = embed_euclidean(m)
    assert _dist_error(m, cert) <= 1e-9
    assert verify_certificate(m, cert).passed


def test_equilateral_passes_tightly():
    m = equilateral_metric()
    rep = verify_certificate(m, embed_euclidean(m), tol=1e-12)
    assert rep.passed


def test_circle_is_not_psd():
    with pytest.raises(NotPSD) as exc:
        embed_euclidean(circle_metric())
    assert exc.value.eigenvalue < 0


def test_embed_circle():
    m = circle_metric()
    cert = embed_circle(m, "abcde")
    assert cert.length == pytest.approx(5.0)
    assert _dist_error(m, cert) <= 1e-12
    with pytest.raises(NotCyclic):
        embed_circle(m, "acbde")


def test_cone_triangle_flat_and_symmetric():
    t = math.pi / 3
    T = realize_cone_triangle(1, 1, 1, t, t, t)
    assert T.flat and T.omega == pytest.approx(2 * math.pi)
    a = math.radians(70)
    T = realize_cone_triangle(1, 1, 1, a, a, a)
    assert not T.flat
    assert T.omega == pytest.approx(2 * math.pi - math.pi / 6)
    assert max(check_cone_triangle(T).values()) <= 1e-10
    # symmetric corners put the cone point equally far from all three vertices
    r = [np.linalg.norm(T.z - T.P), np.linalg.norm(T.z - T.Q), np.linalg.norm(T.z - T.R1)]
    assert np.ptp(r) <= 1e-12


def test_cone_triangle_rejects_small_angles():
    with pytest.raises(ConeTriangleError):
        realize_cone_triangle(1, 1, 1, 0.9, 1.2, 1.2)


def test_cone_disc_flat_case():
    th = 1.1
    u = np.array([math.cos(th), math.sin(th)])
    P = np.array([[0, 0], [-1, 0], [1.3, 0], 0.8 * u, -1.7 * u])
    m = metric_from_points(P, list("xabcd"))
    roles = dict(zip(["x", "v1", "v2", "w1", "w2"], "xabcd"))
    cert = embed_cone_disc(m, roles)
    assert all(T.flat for T in cert.triangles)
    assert verify_certificate(m, cert, tol=1e-12).passed


def test_cone_disc_generated():
    rng = np.random.default_rng(11)
    for _ in range(5):
        m, roles = shared_center_instance(rng)
        cert = embed_cone_disc(m, roles)
        assert not failed_conditions(m, cert)
        rep = verify_certificate(m, cert)
        assert rep.passed, rep.worst


def test_doubled_polytope_generated():
    rng = np.random.default_rng(12)
    for _ in range(5):
        m, t = four_tense_instance(rng)
        cert = embed_doubled_polytope(m, t)
        rep = verify_certificate(m, cert)
        assert rep.passed, (rep.worst, [c for c in rep.checks if not c[2]])
        assert any(name.startswith("reflection:") for name, _, _ in rep.checks)
        if cert.general_position:
            assert edge_clearance(cert) > 1e-7 * m.scale()


def test_doubled_polytope_off_export():
    m, t = four_tense_instance(np.random.default_rng(13))
    off = embed_doubled_polytope(m, t).to_off()
    lines = off.splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    assert len(lines) == 2 + nv + nf


def test_product():
    m, circ, euc = mixture_metric()
    cert = assemble_product([(0.5, embed_circle(circ, "abcde")), (0.5, embed_euclidean(euc))], m)
    assert verify_certificate(m, cert, tol=1e-10).passed
    with pytest.raises(DecompositionMismatch) as exc:
        assemble_product([(0.3, embed_circle(circ, "abcde")), (0.7, embed_euclidean(euc))], m)
    assert exc.value.pair is not None
    single = assemble_product([(1.0, embed_circle(circ, "abcde"))], circ)
    assert isinstance(single, ProductCert)


def test_dispatcher_routes():
    assert isinstance(embed(equilateral_metric()), EuclideanCert)
    assert isinstance(embed(circle_metric()), CircleCert)
    m, _ = four_tense_instance(np.random.default_rng(3))
    assert isinstance(embed(m), DoubledPolytopeCert)
    m, _ = shared_center_instance(np.random.default_rng(4))
    assert embed(m).kind == "ConeDisc"
    with pytest.raises(LssFails) as exc:
        embed(star_metric())
    assert exc.value.report.center == "p"
    assert np.allclose(exc.value.report.argmin, 0.25)
    with pytest.raises(NotConstructive):
        embed(mixture_metric()[0])


def test_dispatcher_is_label_equivariant():
    rng = np.random.default_rng(8)
    sigma = [3, 1, 4, 0, 2]
    for m in (circle_instance(rng)[0], four_tense_instance(rng)[0], shared_center_instance(rng)[0]):
        r = relabel(m, sigma)
        assert verify_certificate(r, embed(r)).passed


def test_certificate_json_round_trip():
    rng = np.random.default_rng(9)
    metrics = [circle_metric(), equilateral_metric(), four_tense_instance(rng)[0], shared_center_instance(rng)[0]]
    for m in metrics:
        cert = embed(m)
        back = load(dumps(cert))
        assert type(back) is type(cert)
        assert np.allclose(certificate_distances(back, list(m.labels)), certificate_distances(cert, list(m.labels)))
    with pytest.raises(CertificateError):
        load('{"schema": "other", "kind": "Circle"}')
