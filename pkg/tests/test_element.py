import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdgfem.element import (CellGeometry, ReferenceBasis, eval_basis, gauss_rule_1d,
                            gauss_rule_2d, map_gradient)


def test_midpoint_rule():
    r = gauss_rule_1d(1)
    assert r.points.tolist() == [0.5]
    assert r.weights.tolist() == [1.0]


def test_two_point_rule():
    r = gauss_rule_1d(2)
    expected = sorted([(1 - 1 / math.sqrt(3)) / 2, (1 + 1 / math.sqrt(3)) / 2])
    np.testing.assert_allclose(sorted(r.points), expected, rtol=0, atol=1e-15)
    np.testing.assert_allclose(r.weights, [0.5, 0.5], rtol=0, atol=1e-15)


def test_two_point_rule_integrates_cubic():
    r = gauss_rule_1d(2)
    assert abs(np.dot(r.weights, r.points ** 3) - 0.25) < 1e-15


@pytest.mark.parametrize("n", [0, 11, -3])
def test_unsupported_point_count(n):
    with pytest.raises(ValueError):
        gauss_rule_1d(n)


@pytest.mark.parametrize("n", range(1, 11))
def test_weights_positive_and_sum_to_one(n):
    r = gauss_rule_1d(n)
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - 1) < 1e-14
    assert r.exactness == 2 * n - 1


@pytest.mark.parametrize("n", range(1, 6))
def test_tensor_rule_exact_for_monomials(n):
    r = gauss_rule_2d(n)
    x, y = r.points.T
    for a in range(2 * n):
        for b in range(2 * n):
            approx = np.dot(r.weights, x ** a * y ** b)
            assert abs(approx - 1 / ((a + 1) * (b + 1))) < 1e-13


def test_q1_corner_value():
    vals, _ = eval_basis(ReferenceBasis(1), (0.0, 0.0))
    assert vals.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_q1_center_values():
    vals, _ = eval_basis(ReferenceBasis(1), (0.5, 0.5))
    np.testing.assert_allclose(vals, 0.25, atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_kronecker_property(k):
    basis = ReferenceBasis(k)
    vals, _ = basis.tabulate(basis.nodes)
    np.testing.assert_allclose(vals, np.eye(basis.size), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(k=st.integers(1, 4), px=st.floats(0, 1), py=st.floats(0, 1))
def test_partition_of_unity(k, px, py):
    vals, grads = eval_basis(ReferenceBasis(k), (px, py))
    assert abs(vals.sum() - 1) < 1e-12
    np.testing.assert_allclose(grads.sum(axis=0), 0.0, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 4), seed=st.integers(0, 2 ** 31 - 1))
def test_nodal_interpolation_reproduces_qk(k, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(k + 1, k + 1))

    def poly(x, y):
        return sum(c[a, b] * x ** a * y ** b for a in range(k + 1) for b in range(k + 1))

    basis = ReferenceBasis(k)
    coeffs = poly(*basis.nodes.T)
    pts = rng.uniform(size=(20, 2))
    vals, grads = basis.tabulate(pts)
    np.testing.assert_allclose(vals @ coeffs, poly(*pts.T), atol=1e-12 * (1 + np.abs(c).sum()))


def test_gradients_match_finite_differences():
    basis = ReferenceBasis(2)
    p = np.array([0.3, 0.7])
    h = 1e-6
    _, g = basis.tabulate(p)
    fx = (basis.tabulate(p + [h, 0])[0] - basis.tabulate(p - [h, 0])[0]) / (2 * h)
    fy = (basis.tabulate(p + [0, h])[0] - basis.tabulate(p - [0, h])[0]) / (2 * h)
    np.testing.assert_allclose(g[:, 0], fx, atol=1e-8)
    np.testing.assert_allclose(g[:, 1], fy, atol=1e-8)


def test_map_gradient_identity():
    geom = CellGeometry((0.0, 0.0), 1.0, 1.0)
    np.testing.assert_array_equal(map_gradient(geom, [0.3, -2.0]), [0.3, -2.0])


def test_map_gradient_scaling():
    geom = CellGeometry((0.0, 0.0), 0.5, 0.25)
    np.testing.assert_allclose(map_gradient(geom, [1.0, 1.0]), [2.0, 4.0])
    assert geom.det == 0.125


def test_q1_interpolant_of_x_has_unit_gradient():
    geom = CellGeometry((0.25, 0.5), 0.5, 0.25)
    basis = ReferenceBasis(1)
    coeffs = geom.to_physical(basis.nodes)[:, 0]
    rule = gauss_rule_2d(3)
    _, grads = basis.tabulate(rule.points)
    phys = map_gradient(geom, np.einsum("qid,i->qd", grads, coeffs))
    np.testing.assert_allclose(phys, np.tile([1.0, 0.0], (len(rule), 1)), atol=1e-14)


def test_unsupported_degree():
    with pytest.raises(ValueError):
        ReferenceBasis(0)
    with pytest.raises(ValueError):
        ReferenceBasis(5)
