import math

import mpmath
import numpy as np
import pytest

from cdgfem.problems import (example1, example2, make_problem, manufactured_linear,
                             sign_condition_margin, verify_forcing)

rng = np.random.default_rng(11)


@pytest.mark.parametrize("eps", [1.0, 1e-1, 1e-3, 1e-6, 1e-8])
def test_example1_vanishes_on_outflow_edges(eps):
    p = example1(eps)
    t = np.linspace(0, 1, 101)
    np.testing.assert_allclose(p.exact_u(np.ones_like(t), t), 0.0, atol=1e-15)
    np.testing.assert_allclose(p.exact_u(t, np.ones_like(t)), 0.0, atol=1e-15)


def test_example1_interior_value_small_eps():
    assert example1(1e-6).exact_u(0.5, 0.5) == 0.75


@pytest.mark.parametrize("eps", [1e-8, 1e-6, 1e-3, 1e-1, 1.0])
def test_example1_finite_everywhere(eps):
    t = np.linspace(0, 1, 201)
    X, Y = np.meshgrid(t, t)
    p = example1(eps)
    for fn in (p.exact_u, p.f):
        assert np.all(np.isfinite(fn(X, Y)))
    assert all(np.all(np.isfinite(c)) for c in p.exact_grad_u(X, Y))


def test_example1_against_high_precision():
    eps = 0.3
    mpmath.mp.dps = 40

    def ref(x, y):
        x, y, e = mpmath.mpf(x), mpmath.mpf(y), mpmath.mpf(eps)
        return x + y * (1 - x) + (mpmath.exp(-1 / e) - mpmath.exp(-(1 - x) * (1 - y) / e)) / (1 - mpmath.exp(-1 / e))

    p = example1(eps)
    for x, y in rng.uniform(size=(20, 2)):
        assert p.exact_u(x, y) == pytest.approx(float(ref(x, y)), abs=1e-14)


def test_example1_layer_is_inside_band():
    p = example1(1e-6)
    pts = rng.uniform(0, 31 / 32, size=(5000, 2))
    pts = np.vstack([pts, [[31 / 32, 31 / 32], [0, 31 / 32], [31 / 32, 0]]])
    x, y = pts.T
    assert np.max(np.abs(p.exact_u(x, y) - (x + y * (1 - x)))) <= 1e-8


def test_example2_zero_lines():
    p = example2(1e-3)
    t = np.linspace(-1, 1, 41)
    np.testing.assert_array_equal(p.exact_u(np.zeros_like(t), t), 0.0)
    np.testing.assert_allclose(p.exact_u(t, np.ones_like(t)), 0.0, atol=0)
    np.testing.assert_allclose(p.exact_u(t, -np.ones_like(t)), 0.0, atol=0)


def test_example2_erf_one():
    assert example2(0.5).exact_u(1.0, 0.0) == pytest.approx(0.8427007929497149, abs=1e-15)


def test_erf_accuracy_against_mpmath():
    mpmath.mp.dps = 30
    p = example2(0.5)    # u(x, 0) = erf(x)
    xs = np.linspace(-6, 6, 241)
    ref = np.array([float(mpmath.erf(x)) for x in xs])
    np.testing.assert_allclose(p.exact_u(xs, 0.0), ref, rtol=0, atol=1e-14)
    assert p.exact_u(40.0, 0.0) == 1.0 and p.exact_u(-40.0, 0.0) == -1.0


@pytest.mark.parametrize("factory", [example1, example2])
def test_boundary_data_is_trace(factory):
    p = factory(1e-2)
    (x0, y0), (x1, y1) = p.bounds
    s = rng.uniform(size=250)
    pts = np.concatenate([
        np.column_stack([x0 + (x1 - x0) * s, np.full(250, y0)]),
        np.column_stack([x0 + (x1 - x0) * s, np.full(250, y1)]),
        np.column_stack([np.full(250, x0), y0 + (y1 - y0) * s]),
        np.column_stack([np.full(250, x1), y0 + (y1 - y0) * s]),
    ])
    assert np.max(np.abs(p.g(*pts.T) - p.exact_u(*pts.T))) == 0.0


def test_manufactured_linear():
    p = manufactured_linear(0.1)
    x, y = rng.uniform(size=(2, 50))
    np.testing.assert_array_equal(p.f(x, y), 5.0)
    gx, gy = p.exact_grad_u(x, y)
    np.testing.assert_array_equal(gx, 2.0)
    np.testing.assert_array_equal(gy, 3.0)
    assert sign_condition_margin(p, x, y) == 0.0


def test_forcing_defects():
    assert verify_forcing(manufactured_linear(0.3), step=1e-3) <= 1e-9
    assert verify_forcing(example1(1e-2), samples=200, step=1e-5) <= 1e-5
    assert verify_forcing(example2(1e-2), samples=200, step=1e-5) <= 1e-5


@pytest.mark.parametrize("factory", [example1, example2])
def test_exact_gradient_against_differences(factory):
    p = factory(0.05)
    (x0, y0), (x1, y1) = p.bounds
    x = rng.uniform(x0 + 0.01, x1 - 0.01, 100)
    y = rng.uniform(y0 + 0.01, y1 - 0.01, 100)
    h = 1e-6
    gx, gy = p.exact_grad_u(x, y)
    np.testing.assert_allclose(gx, (p.exact_u(x + h, y) - p.exact_u(x - h, y)) / (2 * h), atol=1e-6)
    np.testing.assert_allclose(gy, (p.exact_u(x, y + h) - p.exact_u(x, y - h)) / (2 * h), atol=1e-6)


@pytest.mark.parametrize("eps", [0.0, -1.0, math.nan])
@pytest.mark.parametrize("factory", [example1, example2, manufactured_linear])
def test_bad_epsilon(factory, eps):
    with pytest.raises(ValueError):
        factory(eps)


def test_unknown_problem():
    with pytest.raises(ValueError):
        make_problem("example3", 1.0)
