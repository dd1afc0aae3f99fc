from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fivepoint.metric import (
    BadPermutation,
    CoefficientSumNonzero,
    MetricError,
    associated_form,
    form_to_squared_distances,
    from_json,
    in_cone_Kn,
    inverse_permutation,
    metric_from_points,
    relabel,
    validate_metric,
)


def test_validate_collects_every_violation():
    raw = [[1, 2, -1], [3, 0, 1], [-1, 1, 0]]
    with pytest.raises(MetricError) as exc:
        validate_metric("abc", raw)
    kinds = {v[0] for v in exc.value.violations}
    assert {"NonzeroDiagonal", "NegativeDistance", "Asymmetric"} <= kinds


def test_triangle_violation_and_semimetric():
    raw = [[0, 1, 3], [1, 0, 1], [3, 1, 0]]
    with pytest.raises(MetricError, match="TriangleViolation"):
        validate_metric("abc", raw)
    m = validate_metric("abc", raw, mode="semimetric")
    assert m.dist("a", "c") == 3


def test_non_square_and_duplicate_labels():
    with pytest.raises(MetricError, match="NonSquare"):
        validate_metric("ab", [[0, 1]])
    with pytest.raises(MetricError, match="DuplicateLabel"):
        validate_metric("aa", [[0, 1], [1, 0]])


def test_exact_mode_keeps_fractions():
    m = validate_metric("abc", [[0, "1/3", "2/3"], ["1/3", 0, "1/3"], ["2/3", "1/3", 0]], exact=True)
    assert m.exact_dist("a", "c") == Fraction(2, 3)
    assert m.exact_dist("a", "b") + m.exact_dist("b", "c") == m.exact_dist("a", "c")


def test_json_round_trip():
    m = metric_from_points(np.random.default_rng(1).normal(size=(5, 2)))
    assert from_json(m.dumps()) == m
    with pytest.raises(MetricError):
        from_json({"d": []})


def test_relabel_and_inverse():
    m = metric_from_points(np.random.default_rng(2).normal(size=(5, 3)))
    sigma = [3, 0, 4, 1, 2]
    r = relabel(m, sigma)
    for i in range(5):
        for j in range(5):
            assert r.d[i][j] == m.d[sigma[i]][sigma[j]]
    assert relabel(r, inverse_permutation(sigma)) == m
    with pytest.raises(BadPermutation):
        relabel(m, [0, 0, 1, 2, 3])


def test_associated_form_inverts():
    m = metric_from_points(np.random.default_rng(3).normal(size=(5, 3)))
    W = associated_form(m)
    assert np.allclose(form_to_squared_distances(W), m.matrix ** 2)
    assert W.is_psd()


def test_non_euclidean_form_is_not_psd():
    # five equally spaced points on a circle of length 5
    pos = np.arange(5.0)
    t = np.abs(pos[:, None] - pos[None])
    m = validate_metric("abcde", np.minimum(t, 5 - t).tolist())
    assert not associated_form(m).is_psd()


def test_cone_membership():
    assert in_cone_Kn([1, 1, -2])
    assert in_cone_Kn([2, -1, -1, 0])
    assert not in_cone_Kn([1, 1, -1, -1])
    with pytest.raises(CoefficientSumNonzero):
        in_cone_Kn([1, 1, 1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=15, max_size=15))
def test_points_give_psd_forms(xs):
    pts = np.array(xs).reshape(5, 3)
    m = metric_from_points(pts)
    assert associated_form(m).is_psd()
    assert associated_form(m, ordering=[4, 3, 2, 1, 0]).is_psd()
