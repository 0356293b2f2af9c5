"""Potentials of the form V(x) = x**gamma * W(x) on [0, b].

W is smooth and positive; gamma > 0 is not necessarily an integer, so V
switches on at the origin with only Hoelder regularity.  The module owns
domain validation and the two action-type quadratures used everywhere
else:

* ``sigma(p, E)``            -- integral of sqrt(E - V) over [0, b],
* ``t_correction(p, E, x)``  -- integral of sqrt(E - V) - sqrt(E) over [0, x].

Both integrals are computed after the graded substitution x = t**m with
m = ceil(2/gamma), which makes the integrand C^2 at the origin before the
adaptive Gauss-Kronrod rule sees it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    ConfigError,
    NonPositiveGap,
    NonPositiveW,
    NotIncreasing,
    OutOfDomain,
    QuadratureFailure,
)

_W_KINDS = ("polynomial", "exp_poly", "constant", "zero", "callable")

# Roundoff slack for monotonicity checks on the validation grid.
_MONOTONE_SLACK = 1e-12


def _poly_val(coeffs: tuple[float, ...], x):
    acc = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_derivative_at(coeffs: tuple[float, ...], x: float, order: int) -> float:
    total = 0.0
    for j in range(order, len(coeffs)):
        total += coeffs[j] * math.perm(j, order) * x ** (j - order)
    return total


def _poly_shift(coeffs: tuple[float, ...], x0: float) -> list[float]:
    """Coefficients of p(x0 + t) in powers of t."""
    out = [0.0] * len(coeffs)
    for j, c in enumerate(coeffs):
        for k in range(j + 1):
            out[k] += c * math.comb(j, k) * x0 ** (j - k)
    return out


def _exp_series(q: list[float], n_terms: int) -> list[float]:
    """Taylor coefficients of exp(sum q_k t^k) through order n_terms - 1."""
    qs = list(q) + [0.0] * max(0, n_terms - len(q))
    f = [math.exp(qs[0])] + [0.0] * (n_terms - 1)
    for n in range(1, n_terms):
        s = 0.0
        for k in range(1, n + 1):
            s += k * qs[k] * f[n - k]
        f[n] = s / n
    return f


@dataclass(frozen=True)
class WModel:
    """Evaluation handle for W: values, derivatives, Taylor data at 0.

    ``kind`` selects the built-in closed forms.  For ``callable`` the
    derivatives fall back to local polynomial interpolation with spacing
    max(1e-5, x/100); the Taylor list must then be supplied by the caller
    and is authoritative near the origin.
    """

    kind: str
    coeffs: tuple[float, ...] = ()
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in _W_KINDS:
            raise ConfigError(f"unknown W kind {self.kind!r}")
        if self.kind == "callable" and self.fn is None:
            raise ConfigError("callable W needs fn")

    def value(self, x):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
        if self.kind == "constant":
            return np.full_like(np.asarray(x, dtype=float), self.coeffs[0]) + 0.0
        if self.kind == "polynomial":
            return _poly_val(self.coeffs, x)
        if self.kind == "exp_poly":
            return np.exp(_poly_val(self.coeffs, x))
        return self.fn(np.asarray(x, dtype=float))

    def derivative(self, x: float, order: int) -> float:
        """order-th derivative of W at the point x (order 0 = value)."""
        if order == 0:
            return float(self.value(x))
        if self.kind in ("zero", "constant"):
            return 0.0
        if self.kind == "polynomial":
            return _poly_derivative_at(self.coeffs, x, order)
        if self.kind == "exp_poly":
            shifted = _poly_shift(self.coeffs, x)
            f = _exp_series(shifted, order + 1)
            return math.factorial(order) * f[order]
        return self._fd_derivative(x, order)

    def _fd_derivative(self, x: float, order: int) -> float:
        s = max(1e-5, abs(x) / 100.0)
        half = order // 2 + 2
        nodes = x + s * np.arange(-half, half + 1)
        # keep the stencil inside the domain of definition
        if nodes[0] < 0.0:
            nodes = nodes - nodes[0]
        vals = self.fn(nodes)
        deg = len(nodes) - 1
        c = np.polynomial.polynomial.polyfit(nodes - x, vals, deg)
        return math.factorial(order) * c[order]

    def taylor(self, order: int) -> tuple[float, ...]:
        """Taylor coefficients of W at 0 through x**order."""
        n = order + 1
        if self.kind == "zero":
            return (0.0,) * n
        if self.kind == "constant":
            return (float(self.coeffs[0]),) + (0.0,) * (n - 1)
        if self.kind == "polynomial":
            cs = list(self.coeffs) + [0.0] * max(0, n - len(self.coeffs))
            return tuple(cs[:n])
        if self.kind == "exp_poly":
            return tuple(_exp_series(list(self.coeffs), n))
        raise ConfigError("callable W has no closed-form Taylor data; pass w_taylor")


@dataclass(frozen=True)
class Potential:
    """V(x) = x**gamma * W(x) on [0, b], with Taylor data of W at 0."""

    gamma: float
    b: float
    w: WModel
    w_taylor: tuple[float, ...]
    allow_zero: bool = False


@dataclass(frozen=True)
class EnergyWindow:
    """Energy interval [e_min, e_max]; delta is the certified gap min(E - V)."""

    e_min: float
    e_max: float
    delta: float | None = None


def make_potential(gamma: float, b: float, w: WModel,
                   taylor_order: int = 48,
                   w_taylor: tuple[float, ...] | None = None,
                   allow_zero: bool = False) -> Potential:
    if gamma <= 0.0:
        raise ConfigError("gamma must be positive")
    if b <= 0.0:
        raise ConfigError("b must be positive")
    if w.kind == "zero" and not allow_zero:
        raise NonPositiveW("W == 0 requires allow_zero=True")
    if w_taylor is None:
        w_taylor = w.taylor(taylor_order)
    w0 = float(w.value(0.0))
    if abs(w_taylor[0] - w0) > 1e-10 * max(1.0, abs(w0)):
        raise ConfigError("w_taylor[0] disagrees with W(0)")
    if w.kind != "zero" and w0 <= 0.0:
        raise NonPositiveW(f"W(0) = {w0}")
    return Potential(float(gamma), float(b), w, tuple(float(c) for c in w_taylor),
                     allow_zero)


def v_at(p: Potential, x) -> float | np.ndarray:
    """V(x) = x**gamma * W(x); exactly 0.0 at x = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > p.b * (1 + 1e-12)):
        raise OutOfDomain(f"x outside [0, {p.b}]")
    with np.errstate(invalid="ignore"):
        out = np.where(arr == 0.0, 0.0, arr ** p.gamma * p.w.value(arr))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _v_prime(p: Potential, x: np.ndarray) -> np.ndarray:
    """d/dx of x**gamma W(x) away from 0."""
    wp = np.array([p.w.derivative(float(t), 1) for t in np.atleast_1d(x)])
    wv = p.w.value(x)
    return p.gamma * x ** (p.gamma - 1.0) * wv + x ** p.gamma * wp


def validate(p: Potential, window: EnergyWindow, grid_size: int = 2048) -> EnergyWindow:
    """Certify positivity of W, monotonicity of V and the energy gap.

    Returns a copy of the window with ``delta = min over the grid of
    e_min - V``.  Derivative information of W is consulted in addition to
    the grid when the handle provides it; grid violations below 1e-12 are
    ignored as roundoff.
    """
    if window.e_min >= window.e_max:
        raise ConfigError("need e_min < e_max")
    xs = np.linspace(0.0, p.b, grid_size)
    wv = np.asarray(p.w.value(xs))
    if p.w.kind != "zero" and np.any(wv <= 0.0):
        raise NonPositiveW("W must be positive on [0, b]")
    v = np.asarray(v_at(p, xs))
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.any(np.diff(v) < -_MONOTONE_SLACK * scale):
        raise NotIncreasing("x**gamma W(x) must be nondecreasing")
    interior = xs[xs > 0][:: max(1, grid_size // 64)]
    vp = _v_prime(p, interior)
    if np.any(vp < -_MONOTONE_SLACK * scale):
        raise NotIncreasing("V' < 0 detected")
    delta = float(window.e_min - np.max(v))
    if delta <= 0.0:
        raise NonPositiveGap(f"e_min - max V = {delta}")
    return replace(window, delta=delta)


def _graded_power(gamma: float) -> int:
    return max(1, math.ceil(2.0 / gamma)) if gamma < 2.0 else 1


def _quad_graded(f: Callable[[float], float], a: float, c: float, m: int,
                 tol: float) -> float:
    """Integral of f over [a, c] after the substitution x = t**m."""
    if c <= a:
        return 0.0
    if m == 1:
        g = f
        lo, hi = a, c
    else:
        def g(t: float) -> float:
            return f(t ** m) * m * t ** (m - 1)
        lo, hi = a ** (1.0 / m), c ** (1.0 / m)
    val, err = integrate.quad(g, lo, hi, epsabs=0.25 * tol, epsrel=1e-13,
                              limit=500)
    if err > tol:
        raise QuadratureFailure(f"quadrature error estimate {err:.3e} > {tol:.3e}")
    return val


def _require_gap(p: Potential, E: float) -> None:
    xs = np.linspace(0.0, p.b, 64)
    if float(E - np.max(np.asarray(v_at(p, xs)))) <= 0.0:
        raise NonPositiveGap(f"E = {E} does not clear the potential")


def sigma(p: Potential, E: float, tol: float = 1e-12) -> float:
    """Action integral of sqrt(E - V) over [0, b]; increasing in E."""
    _require_gap(p, E)
    if p.w.kind == "zero":
        return p.b * math.sqrt(E)
    m = _graded_power(p.gamma)

    def f(x: float) -> float:
        return math.sqrt(E - float(v_at(p, x)))

    return _quad_graded(f, 0.0, p.b, m, tol)


def sigma_prime(p: Potential, E: float, tol: float = 1e-10) -> float:
    """dsigma/dE = (1/2) integral of (E - V)**-1/2 over [0, b]."""
    _require_gap(p, E)
    if p.w.kind == "zero":
        return 0.5 * p.b / math.sqrt(E)
    m = _graded_power(p.gamma)

    def f(x: float) -> float:
        return 0.5 / math.sqrt(E - float(v_at(p, x)))

    return _quad_graded(f, 0.0, p.b, m, tol)


def t_correction(p: Potential, E: float, x: float, tol: float = 1e-12) -> float:
    """Integral of sqrt(E - V) - sqrt(E) over [0, x].

    Vanishes like x**(gamma+1) at the origin; always nonpositive since V
    is nonnegative.
    """
    if x < 0.0 or x > p.b * (1 + 1e-12):
        raise OutOfDomain(f"x = {x} outside [0, {p.b}]")
    if x == 0.0 or p.w.kind == "zero":
        return 0.0
    _require_gap(p, E)
    m = _graded_power(p.gamma)
    rt_e = math.sqrt(E)

    def f(y: float) -> float:
        return math.sqrt(E - float(v_at(p, y))) - rt_e

    return _quad_graded(f, 0.0, min(x, p.b), m, tol)


# -- config parsing --------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Line-oriented key=value parser; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val.strip()
    return out


def _parse_floats(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in s.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad float list {s!r}") from exc


def potential_from_config(cfg: dict[str, str]) -> Potential:
    """Build a Potential from parsed `gamma=`, `b=`, `w.kind=`, `w.coeffs=` keys."""
    try:
        gamma = float(cfg["gamma"])
        b = float(cfg["b"])
        kind = cfg["w.kind"]
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if kind not in ("polynomial", "exp_poly", "constant", "zero"):
        raise ConfigError(f"unsupported w.kind {kind!r} in config")
    if kind == "zero":
        w = WModel("zero")
        return make_potential(gamma, b, w, allow_zero=True)
    coeffs = _parse_floats(cfg.get("w.coeffs", ""))
    if not coeffs:
        raise ConfigError("w.coeffs required for nonzero W")
    return make_potential(gamma, b, WModel(kind, coeffs))
