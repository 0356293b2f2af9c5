"""Oscillatory quasimodes away from the origin.

A quasimode is u(x) = exp(i S(x)/h) * sum_k h**k A_k(x) with phase
S(x) = -integral_x^b sqrt(E - V) (so S(b) = 0, S' = sqrt(E - V)) and
amplitudes solving the transport hierarchy

    2 S' A_{k+1}' + S'' A_{k+1} = i A_k'',    A_0 = (E - V)**(-1/4),

whose solution vanishing at b is

    A_{k+1}(x) = -(i/2) A_0(x) * integral_x^b A_k''(y) A_0(y) dy.

With this choice the truncated sum leaves exactly h**(N+2) A_N'' exp(iS/h)
when plugged into h^2 u'' + (E - V) u; the conjugate branch is the literal
complex conjugate, which keeps the downstream 2x2 algebra real.

The recursion integral is evaluated after integrating by parts twice,

    integral_x^b A_k'' A_0 = [A_k' A_0 - A_k A_0']_x^b
                             + integral_x^b A_k A_0'' dy,

so that second derivatives land on A_0 only, where they are analytic
(chained through V' and V'' of the potential model).  Numerically
differentiating computed data twice per stage is what this avoids: the
roundoff floor of a Chebyshev series grows by roughly two digits per
differentiation and compounds through the recursion.

Each amplitude carries two representations that must agree at the
crossover 2*x_lo: a Chebyshev series on [x_lo, b] and a lattice
expansion at the origin whose integration constant is anchored to the
Chebyshev value at x_lo.  Evaluation below 2*x_lo uses the expansion,
which captures the x**(gamma - k) blow-up that the grid cannot.

For some (gamma, W) the transport integrand carries an exact x**(-1)
term (its power-lattice exponents can sum to -1), so the next amplitude
picks up a logarithm that a pure power lattice cannot represent.  The
origin expansions are then kept only up to the last logarithm-free
stage; everything at or above x_lo still comes from the Chebyshev side,
which is agnostic to the origin structure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _cheb, gte
from .errors import (
    DifferentiationUnstable,
    ExponentMinusOne,
    OutOfDomain,
    RepresentationMismatch,
)
from .potential import Potential, t_correction, sigma as action_integral, v_at

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CauchyDatum:
    """(u, h u') at a point, for a fixed semiclassical parameter."""

    value: complex
    h_derivative: complex
    x: float
    h: float


@dataclass(frozen=True)
class Quasimode:
    potential: Potential
    energy: float
    n_terms: int                 # highest amplitude index N
    x_lo: float
    n_cheb: int
    action: float                # integral of sqrt(E - V) over [0, b]
    amp_coeffs: tuple            # chopped Chebyshev coefficients on [x_lo, b]
    amp_coeffs_d1: tuple
    amp_series: tuple            # origin expansions; may stop short of N
                                 # when a stage turns logarithmic
    series_order: float
    quad_tol: float

    @property
    def b(self) -> float:
        return self.potential.b

    @property
    def switch_x(self) -> float:
        """Evaluation below this point uses the lattice expansions."""
        return 2.0 * self.x_lo

    def phase(self, x: float) -> float:
        """S(x) = x sqrt(E) + T(x) - action, normalized so S(b) = 0."""
        if x == self.b:
            return 0.0
        t = t_correction(self.potential, self.energy, x, self.quad_tol)
        return x * math.sqrt(self.energy) + t - self.action

    def phase_derivative(self, x: float) -> float:
        return math.sqrt(self.energy - float(v_at(self.potential, x)))


def chop_coeffs(c: np.ndarray, rel: float = 3e-14) -> np.ndarray:
    """Trim the trailing part of a Chebyshev series that is roundoff.

    A flat tail (max within 10x of the median over the last quarter) is a
    noise plateau and sets the cut level; otherwise only coefficients
    below rel * max are dropped.  Keeps at least one coefficient.
    """
    c = np.asarray(c)
    a = np.abs(c)
    m = float(a.max()) if a.size else 0.0
    if m == 0.0:
        return c[:1] if c.size else np.zeros(1, dtype=complex)
    thresh = rel * m
    if a.size >= 16:
        tail = a[(3 * a.size) // 4:]
        med = float(np.median(tail))
        if med > 0.0 and float(tail.max()) < 10.0 * med:
            thresh = max(thresh, 4.0 * med)
    keep = np.nonzero(a > thresh)[0]
    if keep.size == 0:
        return c[:1]
    return c[: int(keep[-1]) + 2]


def auto_n_cheb(x_lo: float, b: float) -> int:
    """Grid size so the Bernstein ellipse through the origin is resolved."""
    n = int(math.ceil(20.0 * math.sqrt(b / max(x_lo, 1e-8 * b))))
    return int(min(1024, max(256, 64 * math.ceil(n / 64))))


def auto_series_order(gamma: float, x_lo: float) -> float:
    """Truncation order so the expansion is trustworthy out to 2*x_lo."""
    base = gte.default_order(gamma)
    t = min(2.0 * x_lo, 0.5)
    if t <= 1e-4:
        return base
    need = math.log(1e-9) / math.log(t) + 1.0
    return float(min(24.0, max(base, math.ceil(need))))


def _v_derivs(p: Potential, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(V', V'') on a grid of points strictly inside (0, b]."""
    g = p.gamma
    w0 = np.asarray(p.w.value(xs), dtype=float)
    w1 = np.array([p.w.derivative(float(t), 1) for t in xs])
    w2 = np.array([p.w.derivative(float(t), 2) for t in xs])
    v1 = g * xs ** (g - 1.0) * w0 + xs ** g * w1
    v2 = (g * (g - 1.0) * xs ** (g - 2.0) * w0
          + 2.0 * g * xs ** (g - 1.0) * w1 + xs ** g * w2)
    return v1, v2


def build_quasimode(p: Potential, E: float, N: int, x_lo: float,
                    n_cheb: int | None = None,
                    series_order: float | None = None,
                    quad_tol: float = 1e-12,
                    rep_tol: float = 1e-6) -> Quasimode:
    """Construct amplitudes A_0..A_N in both representations.

    Raises RepresentationMismatch when the Chebyshev and expansion values
    disagree (relative) at the crossover point, and
    DifferentiationUnstable when the roundoff floor of the Chebyshev
    derivative reaches the percent level of its signal.
    """
    if not 0.0 < x_lo < 0.5 * p.b:
        raise OutOfDomain(f"x_lo = {x_lo} not inside (0, b/2)")
    if N < 0:
        raise ValueError("need N >= 0")
    if n_cheb is None:
        n_cheb = auto_n_cheb(x_lo, p.b)
    if n_cheb < 64:
        raise ValueError("need n_cheb >= 64")
    if series_order is None:
        series_order = auto_series_order(p.gamma, x_lo)

    a, b = x_lo, p.b
    xs = _cheb.lobatto_grid(n_cheb, a, b)       # xs[0] = b, xs[-1] = x_lo
    q = E - np.asarray(v_at(p, xs))
    if np.any(q <= 0.0):
        raise OutOfDomain("E - V must stay positive on [x_lo, b]")
    v1, v2 = _v_derivs(p, xs)
    a0 = (q ** -0.25).astype(complex)
    a0_p = 0.25 * q ** -1.25 * v1
    a0_pp = (5.0 / 16.0) * q ** -2.25 * v1 ** 2 + 0.25 * q ** -1.25 * v2

    order0 = series_order + N
    s_a0 = gte.compose_power(p, E, -0.25, order0)

    coeffs = [chop_coeffs(_cheb.vals_to_coeffs(a0))]
    d1 = [_cheb.cheb_derivative(coeffs[0], a, b)]
    series = [s_a0]
    vals = [a0]

    for k in range(N):
        ck, dk = coeffs[k], d1[k]
        _noise_guard(ck, dk, a, b, k)
        if k == 0:
            akp = a0_p.astype(complex)   # exact: kills the boundary terms
        else:
            akp = _cheb.cheb_eval(dk, a, b, xs)
        # integral_x^b A_k'' A_0 after integrating by parts twice
        c_int = _cheb.vals_to_coeffs(vals[k] * a0_pp)
        tail_vals = _cheb.cheb_eval(_cheb.integral_to_right(c_int, a, b), a, b, xs)
        boundary_b = akp[0] * a0[0] - vals[k][0] * a0_p[0]
        j_vals = boundary_b - (akp * a0 - vals[k] * a0_p) + tail_vals
        nxt = -0.5j * a0 * j_vals
        coeffs.append(chop_coeffs(_cheb.vals_to_coeffs(nxt)))
        d1.append(_cheb.cheb_derivative(coeffs[k + 1], a, b))
        vals.append(nxt)

        if len(series) == k + 1:
            # origin expansion, kept only while it stays a pure power lattice:
            # an exponent hitting -1 would integrate to a logarithm, which the
            # lattice cannot carry; later stages then use Chebyshev only
            try:
                u_k = gte.mul(gte.differentiate(gte.differentiate(series[k])),
                              s_a0)
                tail = gte.antiderivative_from_b(u_k, 0.0)
                const = complex(j_vals[-1]) - gte.evaluate(tail, a)
                series.append(gte.scale(
                    gte.mul(s_a0, gte.antiderivative_from_b(u_k, const)),
                    -0.5j))
            except ExponentMinusOne:
                pass

    qm = Quasimode(p, float(E), N, float(x_lo), int(n_cheb),
                   action_integral(p, E, quad_tol),
                   tuple(coeffs), tuple(d1), tuple(series),
                   float(series_order), quad_tol)
    _check_crossover(qm, rep_tol)
    return qm


def _noise_guard(ck: np.ndarray, dk: np.ndarray, a: float, b: float, k: int) -> None:
    sig = float(np.max(np.abs(dk))) if dk.size else 0.0
    if sig == 0.0:
        return
    noise = _EPS * float(np.max(np.abs(ck))) * len(ck) ** 2 * (2.0 / (b - a))
    if noise > 1e-2 * sig:
        raise DifferentiationUnstable(
            f"A_{k}' noise floor {noise:.2e} vs signal {sig:.2e}")


def _check_crossover(qm: Quasimode, rep_tol: float) -> None:
    xc = qm.switch_x
    if xc >= 0.9 * qm.b:
        return
    for k in range(len(qm.amp_series)):
        via_cheb = complex(_cheb.cheb_eval(qm.amp_coeffs[k], qm.x_lo, qm.b, xc))
        via_series = gte.evaluate(qm.amp_series[k], xc)
        scale = float(np.max(np.abs(_cheb.cheb_eval(
            qm.amp_coeffs[k], qm.x_lo, qm.b,
            np.linspace(qm.x_lo, qm.b, 17)))))
        denom = max(abs(via_cheb), abs(via_series), 1e-9 * scale, 1e-300)
        rel = abs(via_cheb - via_series) / denom
        if rel > rep_tol:
            raise RepresentationMismatch(
                f"A_{k} at x = {xc:.3e}: cheb {via_cheb:.6e}, "
                f"series {via_series:.6e}, rel {rel:.2e}")


def amplitude_value(qm: Quasimode, k: int, x: float, deriv: int = 0) -> complex:
    """A_k or a derivative at one point, picking the proper representation."""
    if x < qm.switch_x and k < len(qm.amp_series):
        s = qm.amp_series[k]
        for _ in range(deriv):
            s = gte.differentiate(s)
        return gte.evaluate(s, x)
    if x < qm.x_lo * (1.0 - 1e-12):
        raise RepresentationMismatch(
            f"A_{k} has no origin expansion (logarithmic stage) and "
            f"x = {x} is below the Chebyshev domain")
    if deriv == 0:
        c = qm.amp_coeffs[k]
    elif deriv == 1:
        c = qm.amp_coeffs_d1[k]
    else:
        c = _cheb.cheb_derivative(qm.amp_coeffs[k], qm.x_lo, qm.b, m=deriv)
    return complex(_cheb.cheb_eval(c, qm.x_lo, qm.b, x))


def evaluate_quasimode(qm: Quasimode, sign: int, h: float, x: float) -> CauchyDatum:
    """Cauchy datum (u, h u') of the sign = +/-1 branch at x in [x_lo, b]."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if x < qm.x_lo * (1 - 1e-12) or x > qm.b * (1 + 1e-12):
        raise OutOfDomain(f"x = {x} outside [{qm.x_lo}, {qm.b}]")
    if sign == -1:
        d = evaluate_quasimode(qm, +1, h, x)
        return CauchyDatum(d.value.conjugate(), d.h_derivative.conjugate(), x, h)
    amp = 0.0j
    amp_d = 0.0j
    hk = 1.0
    for k in range(qm.n_terms + 1):
        amp += hk * amplitude_value(qm, k, x)
        amp_d += hk * amplitude_value(qm, k, x, deriv=1)
        hk *= h
    s = qm.phase(x)
    sp = qm.phase_derivative(x)
    pf = cmath.exp(1j * s / h)
    return CauchyDatum(pf * amp, pf * (1j * sp * amp + h * amp_d), x, h)


def wronskian_defect(qm: Quasimode, h: float, xs) -> float:
    """max over xs of |h^2 (u+' u- - u+ u-') - 2ih| for the branch pair."""
    worst = 0.0
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        d = evaluate_quasimode(qm, +1, h, float(x))
        w = 2j * h * (d.h_derivative * d.value.conjugate()).imag
        worst = max(worst, abs(w - 2j * h))
    return worst


def residual(qm: Quasimode, h: float, x: float) -> float:
    """|h^2 u'' + (E - V) u| at x; equals h**(N+2) |A_N''(x)| exactly."""
    return h ** (qm.n_terms + 2) * abs(amplitude_value(qm, qm.n_terms, x, deriv=2))


def dump_amplitudes(qm: Quasimode, xs) -> str:
    """CSV rows 'x,k,re,im' for external inspection."""
    lines = ["x,k,re,im"]
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        for k in range(qm.n_terms + 1):
            a = amplitude_value(qm, k, float(x))
            lines.append(f"{x:.17g},{k},{a.real:.17g},{a.imag:.17g}")
    return "\n".join(lines) + "\n"
