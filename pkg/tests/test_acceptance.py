"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the live
output) or directly as ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import sys
import time

import numpy as np
import pytest

from fivepoint import classify as cl
from fivepoint.comparison import comparison_config, lss_all, lss_with_center, simplex_minimum, tense_structure
from fivepoint.embed import embed_circle, embed_cone_disc, embed_doubled_polytope
from fivepoint.embed.cone import failed_conditions
from fivepoint.generators import (
    circle_instance,
    four_tense_instance,
    random_form,
    random_metric,
    shared_center_instance,
    star_metric,
)
from fivepoint.metric import relabel
from fivepoint.verify import (
    FAMILIES,
    SurfaceComplex,
    certificate_distances,
    doubling_distance,
    make_rng,
    oracle_lss_grid,
    sample_metric,
    surface_distances,
    verify_certificate,
)

_CAPSYS = None


def report(n, ok: bool, detail: str):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


@pytest.fixture(autouse=True)
def _live_output(capsys):
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


# shared generated certificates for criteria 5 and 6
_CACHE: dict = {}


def _polytopes():
    if "poly" not in _CACHE:
        rng = make_rng(501)
        _CACHE["poly"] = [(m, embed_doubled_polytope(m, t)) for m, t in (four_tense_instance(rng) for _ in range(100))]
    return _CACHE["poly"]


def _cone_discs():
    if "cone" not in _CACHE:
        rng = make_rng(502)
        out = []
        for _ in range(100):
            m, roles = shared_center_instance(rng)
            out.append((m, embed_cone_disc(m, roles, check=False)))
        _CACHE["cone"] = out
    return _CACHE["cone"]


def test_1_classification():
    t0 = time.perf_counter()
    tree = cl.search_configurations()
    rows = cl.compare_with_table(tree)
    elapsed = time.perf_counter() - t0
    found = sorted(cl.canonical_key(n.config) for n in tree.terminals)
    expected = sorted(cl.canonical_key(c) for c in cl.lemma_configurations())
    agree = sum(r.agrees for r in rows)
    ok = len(tree.nodes) == 16 and found == expected and agree == 16 and elapsed < 1.0
    assert report(1, ok, f"{len(tree.nodes)} nodes, {len(tree.terminals)} terminals matching the lemma list: "
                         f"{found == expected}, table rows agreeing {agree}/16, {elapsed:.3f} s")


def test_2_lss_necessity():
    t0 = time.perf_counter()
    bad = {}
    for fam in FAMILIES:
        bad[fam] = sum(not lss_all(sample_metric(fam, seed=s), tol=1e-9).holds for s in range(1000))
    elapsed = time.perf_counter() - t0
    ok = not any(bad.values()) and elapsed < 30.0
    assert report(2, ok, f"5 x 1000 samples, failures {bad}, {elapsed:.1f} s")


def test_3_comparison_equivalence():
    rng = make_rng(3)
    holds, worst = 0, 0.0
    for _ in range(500):
        m = random_metric(rng)
        center = m.labels[int(rng.integers(5))]
        others = [x for x in m.labels if x != center]
        if lss_with_center(m, center, others).holds:
            holds += 1
            worst = max(worst, comparison_config(m, center, others, seed=int(rng.integers(2 ** 31))).residual)
    star = star_metric()
    floor = comparison_config(star, "p", starts=16).residual
    ok = worst <= 1e-8 and floor >= 1e-3
    assert report(3, ok, f"{holds}/500 hold, worst residual {worst:.2e}; star residual floor {floor:.4f} "
                         f"(16 starts, LSS minimum {lss_with_center(star, 'p', 'abcd').min_value:.3f})")


def test_4_oracle_agreement():
    rng = make_rng(4)
    worst = 0.0
    for _ in range(200):
        A = random_form(rng)
        v, _ = simplex_minimum(A)
        g = oracle_lss_grid(A, 200)
        worst = max(worst, abs(v - g) / (1 + np.abs(A).max()))
    assert report(4, worst <= 1e-4, f"200 forms, worst |face - grid| / (1 + max|A|) = {worst:.2e}")


def test_5a_circle():
    rng = make_rng(51)
    worst = 0.0
    for _ in range(100):
        m, order = circle_instance(rng)
        cert = embed_circle(m, order)
        worst = max(worst, float(np.abs(certificate_distances(cert, list(m.labels)) - m.matrix).max()))
    assert report("5a", worst <= 1e-12, f"100 circle metrics, max round-trip error {worst:.2e}")


def test_5b_doubled_polytope():
    worst, failed, reflections, nudged = 0.0, 0, 0, 0
    for m, cert in _polytopes():
        rep = verify_certificate(m, cert, tol=1e-6)
        worst = max(worst, rep.max_rel)
        failed += not rep.passed
        reflections += sum(1 for name, _, ok in rep.checks if name.startswith("reflection:") and ok)
        nudged += not cert.general_position
    ok = failed == 0 and reflections == 400
    assert report("5b", ok, f"100 certificates, {failed} failed, max relative error {worst:.2e}, "
                            f"reflection equalities {reflections}/400, not in general position {nudged}")


def test_5c_cone_disc():
    cond_bad, failed, worst, drift = 0, 0, 0.0, 0.0
    for m, cert in _cone_discs():
        cond_bad += bool(failed_conditions(m, cert, 1e-9))
        rep = verify_certificate(m, cert, tol=1e-6)
        failed += not rep.passed
        worst = max(worst, rep.max_rel)
        drift = max(drift, next(v for n, v, _ in rep.checks if n == "unfold_depth_7_vs_8"))
    ok = cond_bad == 0 and failed == 0 and drift <= 1e-12
    assert report("5c", ok, f"100 certificates, condition failures {cond_bad}, verification failures {failed}, "
                            f"max relative error {worst:.2e}, depth 7 vs 8 drift {drift:.1e}")


def _axiom_slack(D):
    n = len(D)
    asym = float(np.abs(D - D.T).max())
    tri = max((D[i, k] - D[i, j] - D[j, k] for i, j, k in itertools.permutations(range(n), 3)), default=0.0)
    return asym, max(tri, 0.0)


def test_6_oracle_axioms():
    worst_s = [0.0, 0.0, 0.0]  # surface: raw asymmetry, asymmetry, triangle
    for m, cert in _cone_discs():
        S = SurfaceComplex(cert)
        raw = np.array([[S._straight(a, 8)[b] for b in S.vertices] for a in S.vertices])
        finite = np.isfinite(raw) & np.isfinite(raw.T)
        worst_s[0] = max(worst_s[0], float(np.abs(raw - raw.T)[finite].max()))
        _, D = surface_distances(cert)
        a, t = _axiom_slack(D)
        worst_s[1], worst_s[2] = max(worst_s[1], a), max(worst_s[2], t)
    rng = make_rng(6)
    worst_d = [0.0, 0.0]
    for m, cert in _polytopes():
        pts = [cert.placement(x) for x in cert.labels]
        # extra points of V (convex combinations) on random sheets
        base = np.array([p for _, p in pts])
        for _ in range(3):
            w = rng.dirichlet(np.ones(len(base)))
            pts.append((int(rng.integers(1, 3)), w @ base))
        D = np.array([[doubling_distance(cert, a, b) for b in pts] for a in pts])
        a, t = _axiom_slack(D)
        worst_d = [max(worst_d[0], a), max(worst_d[1], t)]
    ok = max(worst_s + worst_d) <= 1e-10
    assert report(6, ok, f"surface: raw asymmetry {worst_s[0]:.1e}, asymmetry {worst_s[1]:.1e}, "
                         f"triangle slack {worst_s[2]:.1e}; doubling: asymmetry {worst_d[0]:.1e}, "
                         f"triangle slack {worst_d[1]:.1e}")


def _verdicts(m, back=None):
    """Verdicts with labels mapped through ``back`` (new label -> original label)."""
    back = back or {x: x for x in m.labels}
    summary = lss_all(m)
    ts = tense_structure(m)
    tri = frozenset((back[t.center], frozenset(back[x] for x in t.others)) for t in ts.triples)
    arr = frozenset((back[q.center], frozenset(back[x] for x in q.others)) for q in ts.quads + ts.quints)
    kind = cl.match_configuration(m.labels, [t for t in ts.triples if not t.degenerate]).kind
    return summary.holds, tri, arr, kind


def test_7_equivariance():
    rng = make_rng(7)
    metrics = []
    for k in range(20):
        kind = k % 5
        if kind == 0:
            metrics.append(circle_instance(rng)[0])
        elif kind == 1:
            metrics.append(four_tense_instance(rng)[0])
        elif kind == 2:
            metrics.append(shared_center_instance(rng)[0])
        elif kind == 3:
            metrics.append(star_metric() if k == 3 else random_metric(rng))
        else:
            metrics.append(sample_metric(FAMILIES[k % len(FAMILIES)], seed=k))
    broken = 0
    classes = set()
    for m in metrics:
        ref = _verdicts(m)
        classes.add((ref[0], ref[3]))
        for sigma in itertools.permutations(range(5)):
            r = relabel(m, sigma)
            back = {m.labels[k]: m.labels[sigma[k]] for k in range(5)}
            if _verdicts(r, back) != ref:
                broken += 1
    assert report(7, broken == 0, f"20 metrics x 120 relabelings, {broken} changed verdicts; "
                                  f"(lss, class) seen: {sorted(classes)}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failures = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
