"""Chebyshev collocation helpers on an interval [a, b].

Values live on the Gauss-Lobatto grid x_j = mid + half*cos(pi j / n)
(descending from b to a); coefficients follow the plain numpy convention
f = sum c_k T_k(u) with u the affine image of x in [-1, 1].
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as _c
from scipy.fft import dct


def lobatto_grid(n: int, a: float, b: float) -> np.ndarray:
    j = np.arange(n + 1)
    return 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * j / n)


def vals_to_coeffs(v: np.ndarray) -> np.ndarray:
    """Interpolation coefficients from values on the Lobatto grid."""
    n = v.shape[0] - 1
    if np.iscomplexobj(v):
        x = dct(v.real, type=1) + 1j * dct(v.imag, type=1)
    else:
        x = dct(v, type=1)
    c = x / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def coeffs_to_vals(c: np.ndarray, n: int) -> np.ndarray:
    u = np.cos(np.pi * np.arange(n + 1) / n)
    return _c.chebval(u, c)


def cheb_eval(c: np.ndarray, a: float, b: float, x) -> np.ndarray:
    u = (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)
    return _c.chebval(u, c)


def cheb_derivative(c: np.ndarray, a: float, b: float, m: int = 1) -> np.ndarray:
    d = _c.chebder(c, m=m, scl=2.0 / (b - a))
    if d.size == 0:
        return np.zeros(1, dtype=np.asarray(c).dtype)
    return d


def integral_to_right(c: np.ndarray, a: float, b: float) -> np.ndarray:
    """Coefficients of x -> integral_x^b f, given coefficients of f."""
    prim = _c.chebint(c, m=1, lbnd=1.0, scl=0.5 * (b - a))
    return -prim
