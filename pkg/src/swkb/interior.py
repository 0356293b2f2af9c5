"""Interior solutions near the turning-on point via a Volterra equation.

In the stretched variable z = sqrt(E) x / h the equation becomes

    v'' + v = g(z) v,     g(z) = h**gamma z**gamma E**(-1-gamma/2) W(hz/sqrt(E)),

(the E power keeps the rescaled equation equivalent to the original one)
and the solutions with data (1, +-i) at 0 satisfy v = e_pm + K[v] with

    K[v](z) = integral_0^z sin(z - zeta) g(zeta) v(zeta) dzeta.

The production path marches the trapezoidal discretization left to right
(lower triangular, so forward substitution is exact); sin(z - zeta) is
split by the addition theorem so the march is O(n).  K has small norm
(~ h**delta), which a Richardson step check and an explicit contraction
guard certify per solve.

The minus branch is the literal conjugate of the plus branch (the kernel
is real), which the matching layer relies on for exact realness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.integrate import cumulative_trapezoid

from .errors import (
    ConfigError,
    ContractionFailure,
    GridTooCoarse,
    TaylorOrderInsufficient,
)
from .potential import Potential
from .wkb_exterior import CauchyDatum

_RICHARDSON_GATE = 1e-8
_MAX_GRID = 1_000_000


@dataclass(frozen=True)
class InteriorConfig:
    """Geometry of one interior solve.

    z_max = sqrt(E) h**(-eps) is the stretched image of the matching point
    x_h = h**(1-eps); eps = (gamma - delta_int)/(gamma + 1) trades interior
    smallness (norm ~ h**delta_int) against how far the WKB region must
    reach down.
    """

    delta_int: float
    eps: float
    z_max: float
    n_grid: int
    h: float
    E: float

    @property
    def x_h(self) -> float:
        return self.h ** (1.0 - self.eps)

    @property
    def dz(self) -> float:
        return self.z_max / self.n_grid


def make_config(p: Potential, E: float, h: float,
                delta_int: float | None = None,
                eps: float | None = None,
                n_grid: int | None = None) -> InteriorConfig:
    """Fill in defaults: delta_int = gamma/2, grid spacing <= 0.02."""
    g = p.gamma
    if eps is None:
        if delta_int is None:
            delta_int = 0.5 * g
        eps = (g - delta_int) / (g + 1.0)
    else:
        delta_int = g - eps * (g + 1.0)
    if not 0.0 < delta_int < g:
        raise ConfigError(f"delta_int = {delta_int} not inside (0, gamma)")
    if not 0.0 < eps < g / (g + 1.0):
        raise ConfigError(f"eps = {eps} not inside (0, gamma/(gamma+1))")
    if E <= 0.0 or h <= 0.0:
        raise ConfigError("need E > 0 and h > 0")
    z_max = math.sqrt(E) * h ** -eps
    if n_grid is None:
        n_grid = max(8000, int(math.ceil(z_max / 0.02)))
        if g < 1.0:
            # kernel ~ z**gamma: trapezoid error O(dz**(1+gamma)), not O(dz**2)
            pref = 0.5 * h ** g * E ** (-1.0 - 0.5 * g) * abs(float(p.w.value(0.0)))
            if pref > 0.0:
                dz_s = (6e-9 / pref) ** (1.0 / (1.0 + g))
                n_grid = max(n_grid, int(math.ceil(z_max / dz_s)))
    n_grid = 2 * (min(int(n_grid), _MAX_GRID) // 2)
    if z_max / n_grid > 0.05:
        raise ConfigError("grid spacing exceeds 0.05; raise n_grid")
    return InteriorConfig(float(delta_int), float(eps), float(z_max),
                          int(n_grid), float(h), float(E))


@dataclass(frozen=True)
class InteriorSolution:
    z_grid: np.ndarray
    v: np.ndarray
    v_dot: np.ndarray
    label: str                   # "+" or "-"
    error_estimate: float        # Richardson estimate for v and v_dot


def _g_values(p: Potential, cfg: InteriorConfig, z: np.ndarray) -> np.ndarray:
    """Kernel weight g(z) >= 0 on the grid; g(0) = 0."""
    h, E, g = cfg.h, cfg.E, p.gamma
    x = h * z / math.sqrt(E)
    w = np.asarray(p.w.value(x), dtype=float)
    out = np.empty_like(w)
    nz = z > 0.0
    out[nz] = h ** g * z[nz] ** g * E ** (-1.0 - 0.5 * g) * w[nz]
    out[~nz] = 0.0
    return out


@njit(cache=True, nogil=True)
def _march(n: int, dz: float, g: np.ndarray, sign: float):
    """Forward trapezoidal substitution for v = e + K[v], v_dot alongside."""
    v = np.empty(n + 1, dtype=np.complex128)
    vdot = np.empty(n + 1, dtype=np.complex128)
    v[0] = 1.0 + 0.0j
    vdot[0] = sign * 1j
    # C, S accumulate sum' of cos(z_m) g_m v_m and sin(z_m) g_m v_m, m < n
    c_acc = 0.0j
    s_acc = 0.0j
    for m in range(1, n + 1):
        zm_prev = (m - 1) * dz
        wgt = 0.5 if m == 1 else 1.0
        gv = g[m - 1] * v[m - 1]
        c_acc += wgt * math.cos(zm_prev) * gv
        s_acc += wgt * math.sin(zm_prev) * gv
        zm = m * dz
        cz = math.cos(zm)
        sz = math.sin(zm)
        e_m = complex(cz, sign * sz)
        v[m] = e_m + dz * (sz * c_acc - cz * s_acc)
        vdot[m] = (sign * 1j * e_m
                   + dz * ((cz * c_acc + sz * s_acc) + 0.5 * g[m] * v[m]))
    return v, vdot


def _solve_plus(p: Potential, cfg: InteriorConfig, n: int):
    z = np.linspace(0.0, cfg.z_max, n + 1)
    g = _g_values(p, cfg, z)
    v, vdot = _march(n, cfg.z_max / n, g, +1.0)
    return z, v, vdot


def operator_norm(p: Potential, cfg: InteriorConfig) -> float:
    """Trapezoid value of integral_0^{z_max} g, the sup-row-sum of K.

    Also checks the closed-form bound sup|W| h^gamma z_max^(gamma+1) /
    ((gamma+1) E^(1+gamma/2)) within 10%.
    """
    z = np.linspace(0.0, cfg.z_max, cfg.n_grid + 1)
    g = _g_values(p, cfg, z)
    norm = float(np.trapezoid(np.abs(g), z))
    w_sup = float(np.max(np.abs(np.asarray(
        p.w.value(cfg.h * z / math.sqrt(cfg.E))))))
    bound = (w_sup * cfg.h ** p.gamma * cfg.z_max ** (p.gamma + 1.0)
             / ((p.gamma + 1.0) * cfg.E ** (1.0 + 0.5 * p.gamma)))
    assert norm <= 1.1 * bound, f"row-sum {norm} exceeds closed bound {bound}"
    return norm


def solve_basis(p: Potential, cfg: InteriorConfig
                ) -> tuple[InteriorSolution, InteriorSolution]:
    """Both branches v_pm = (I - K)^(-1) e_pm with a Richardson step check."""
    nrm = operator_norm(p, cfg)
    if nrm >= 0.5:
        raise ContractionFailure(f"operator norm {nrm:.3f} >= 1/2")
    n = cfg.n_grid
    z, v, vdot = _solve_plus(p, cfg, n)
    _, v2, vdot2 = _solve_plus(p, cfg, n // 2)
    est = max(float(np.max(np.abs(v[::2] - v2))),
              float(np.max(np.abs(vdot[::2] - vdot2)))) / 3.0
    if est > _RICHARDSON_GATE:
        raise GridTooCoarse(f"Richardson estimate {est:.3e} > {_RICHARDSON_GATE}")
    plus = InteriorSolution(z, v, vdot, "+", est)
    minus = InteriorSolution(z, np.conjugate(v), np.conjugate(vdot), "-", est)
    return plus, minus


def apply_k(p: Potential, cfg: InteriorConfig, v: np.ndarray) -> np.ndarray:
    """K[v] on the grid by cumulative trapezoids (property-test oracle)."""
    z = np.linspace(0.0, cfg.z_max, len(v))
    g = _g_values(p, cfg, z)
    ic = cumulative_trapezoid(np.cos(z) * g * v, z, initial=0.0)
    is_ = cumulative_trapezoid(np.sin(z) * g * v, z, initial=0.0)
    return np.sin(z) * ic - np.cos(z) * is_


def picard_iterates(p: Potential, cfg: InteriorConfig, sign: int = +1,
                    n_iter: int = 8) -> list[np.ndarray]:
    """e, e + K[e], ... built with the cumulative-trapezoid route."""
    z = np.linspace(0.0, cfg.z_max, cfg.n_grid + 1)
    e = np.exp(1j * sign * z)
    out = [e]
    v = e
    for _ in range(n_iter):
        v = e + apply_k(p, cfg, v)
        out.append(v)
    return out


def _apply_l(j: int, wj_scaled: float, p: Potential, cfg: InteriorConfig,
             z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """L_j[v] with kernel sin(z - zeta) h^(gamma+j) zeta^(gamma+j) w_j-scaled."""
    a = p.gamma + j
    ker = np.zeros_like(z)
    nz = z > 0.0
    ker[nz] = cfg.h ** a * z[nz] ** a * wj_scaled
    ic = cumulative_trapezoid(np.cos(z) * ker * v, z, initial=0.0)
    is_ = cumulative_trapezoid(np.sin(z) * ker * v, z, initial=0.0)
    return np.sin(z) * ic - np.cos(z) * is_


def neumann_compare(p: Potential, cfg: InteriorConfig, D: float) -> float:
    """sup-norm distance between solve_basis output and the truncated sum.

    The truncation keeps ordered tuples where each index j occurs at most
    n_j times, n_j the greatest n with n (delta + j d) < D and
    d = (1 + delta)/(1 + gamma); tuples one step past the cap would
    already contribute O(h^D).
    """
    d = (1.0 + cfg.delta_int) / (1.0 + p.gamma)
    n_terms = int(math.ceil(D / d))
    caps = []
    for j in range(n_terms):
        delta_j = cfg.delta_int + j * d
        # greatest n with n * delta_j < D, robust to D being an exact multiple
        caps.append(max(0, int(math.floor(D * (1.0 - 1e-12) / delta_j))))
    if len(p.w_taylor) < n_terms:
        raise TaylorOrderInsufficient(
            f"need {n_terms} Taylor coefficients of W, have {len(p.w_taylor)}")
    e_scale = cfg.E ** (-1.0 - 0.5 * p.gamma)
    weights = [p.w_taylor[j] * e_scale * cfg.E ** (-0.5 * j)
               for j in range(n_terms)]

    z = np.linspace(0.0, cfg.z_max, cfg.n_grid + 1)
    plus, _minus = solve_basis(p, cfg)

    worst = 0.0
    for sign in (+1, -1):
        e = np.exp(1j * sign * z)
        total = np.zeros_like(e)
        counts = [0] * n_terms

        def dfs(f: np.ndarray) -> None:
            nonlocal total
            total = total + f
            for j in range(n_terms):
                if counts[j] < caps[j]:
                    counts[j] += 1
                    dfs(_apply_l(j, weights[j], p, cfg, z, f))
                    counts[j] -= 1

        dfs(e)
        ref = plus.v if sign > 0 else np.conjugate(plus.v)
        worst = max(worst, float(np.max(np.abs(ref - total))))
    return worst


def cauchy_at_matching(sol: InteriorSolution, p: Potential,
                       cfg: InteriorConfig) -> CauchyDatum:
    """(psi(x_h), h psi'(x_h)); the chain rule gives h psi' = sqrt(E) v_dot."""
    return CauchyDatum(complex(sol.v[-1]),
                       math.sqrt(cfg.E) * complex(sol.v_dot[-1]),
                       cfg.x_h, cfg.h)


def asymptotic_coefficients(sol: InteriorSolution, cfg: InteriorConfig
                            ) -> tuple[complex, complex]:
    """(c+, c-) with v = c+ e^{iz} + c- e^{-iz} matched in value and slope."""
    z = cfg.z_max
    v = complex(sol.v[-1])
    vd = complex(sol.v_dot[-1])
    c_plus = 0.5 * (v - 1j * vd) * complex(math.cos(z), -math.sin(z))
    c_minus = 0.5 * (v + 1j * vd) * complex(math.cos(z), math.sin(z))
    return c_plus, c_minus


def dump_solution(sol: InteriorSolution) -> str:
    """CSV rows 'z, re(v), im(v), re(v_dot), im(v_dot)'."""
    lines = ["z,re_v,im_v,re_vdot,im_vdot"]
    for z, v, vd in zip(sol.z_grid, sol.v, sol.v_dot):
        lines.append(f"{z:.17g},{v.real:.17g},{v.imag:.17g},"
                     f"{vd.real:.17g},{vd.imag:.17g}")
    return "\n".join(lines) + "\n"
