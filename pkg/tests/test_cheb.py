import numpy as np

from swkb import _cheb


def test_roundtrip_on_polynomials():
    rng = np.random.default_rng(11)
    a, b = 0.2, 1.7
    for _ in range(50):
        deg = int(rng.integers(0, 12))
        coef = rng.standard_normal(deg + 1)
        xs = _cheb.lobatto_grid(32, a, b)
        vals = np.polyval(coef, xs)
        c = _cheb.vals_to_coeffs(vals)
        xq = rng.uniform(a, b, size=7)
        np.testing.assert_allclose(_cheb.cheb_eval(c, a, b, xq),
                                   np.polyval(coef, xq),
                                   rtol=1e-12, atol=1e-12)


def test_roundtrip_complex_values():
    a, b = 0.0, 1.0
    xs = _cheb.lobatto_grid(48, a, b)
    vals = np.exp(1j * 3.0 * xs) + xs
    c = _cheb.vals_to_coeffs(vals)
    xq = np.linspace(a, b, 11)
    np.testing.assert_allclose(_cheb.cheb_eval(c, a, b, xq),
                               np.exp(1j * 3.0 * xq) + xq, atol=1e-12)


def test_derivative_of_exp():
    a, b = 0.1, 2.0
    xs = _cheb.lobatto_grid(64, a, b)
    c = _cheb.vals_to_coeffs(np.exp(xs))
    d1 = _cheb.cheb_derivative(c, a, b)
    d2 = _cheb.cheb_derivative(c, a, b, m=2)
    xq = np.linspace(a, b, 9)
    np.testing.assert_allclose(_cheb.cheb_eval(d1, a, b, xq), np.exp(xq),
                               rtol=1e-11)
    np.testing.assert_allclose(_cheb.cheb_eval(d2, a, b, xq), np.exp(xq),
                               rtol=1e-8)


def test_derivative_of_constant_is_zero():
    c = _cheb.vals_to_coeffs(np.full(17, 3.5))
    d = _cheb.cheb_derivative(c, 0.0, 1.0)
    assert float(np.max(np.abs(_cheb.cheb_eval(d, 0.0, 1.0,
                                               np.linspace(0, 1, 5))))) < 1e-13


def test_integral_to_right():
    # f = cos, integral_x^b cos = sin(b) - sin(x)
    a, b = 0.3, 2.1
    xs = _cheb.lobatto_grid(64, a, b)
    c = _cheb.vals_to_coeffs(np.cos(xs))
    prim = _cheb.integral_to_right(c, a, b)
    xq = np.linspace(a, b, 13)
    np.testing.assert_allclose(_cheb.cheb_eval(prim, a, b, xq),
                               np.sin(b) - np.sin(xq), atol=1e-13)
    # vanishes at the right endpoint by construction
    assert abs(float(_cheb.cheb_eval(prim, a, b, b))) < 1e-14


def test_integral_derivative_inverse_pair():
    rng = np.random.default_rng(23)
    a, b = 0.05, 1.0
    xs = _cheb.lobatto_grid(40, a, b)
    for _ in range(20):
        coef = rng.standard_normal(6)
        c = _cheb.vals_to_coeffs(np.polyval(coef, xs))
        back = _cheb.cheb_derivative(_cheb.integral_to_right(c, a, b), a, b)
        xq = rng.uniform(a, b, size=5)
        # d/dx int_x^b f = -f
        np.testing.assert_allclose(_cheb.cheb_eval(back, a, b, xq),
                                   -np.polyval(coef, xq), atol=1e-11)
