"""Gluing interior and exterior bases into the Cauchy-data transfer matrix.

M(E, h) maps normalized Cauchy data at b to normalized Cauchy data at 0:
with N_0 = diag(E^{1/4}, E^{-1/4}) and N_b built from E - V(b),

    M = N_0 C_0 M_int(x_h)^{-1} M_ext(x_h) M_ext(b)^{-1} N_b^{-1},

where basis matrices hold columns (u, h u') of the two branches, x_h =
h^{1-eps} is the handover point, and C_0 = [[1, 1], [i sqrt(E), -i sqrt(E)]]
is the interior data at 0.  For V == 0 the composition collapses to the
rotation by sigma/h exactly; in general M is real up to the construction
error, which is recorded before the imaginary part is dropped.

The correction content of M - D_h lives on the exponent lattice
{m gamma + n} and is measured by least squares over an h-grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import interior, wkb_exterior
from .errors import ConfigError, IllConditionedBasis, RankDeficient, ToleranceExceeded
from .potential import Potential, sigma, v_at

_COND_LIMIT = 1e8


@dataclass(frozen=True)
class MatchConfig:
    """Knobs shared by the interior solve and the exterior quasimode.

    x_lo defaults to the handover point x_h itself, so the quasimode's
    origin expansions carry the evaluation there and the Chebyshev part
    carries [x_h, b].
    """

    n_terms: int = 4
    delta_int: float | None = None
    eps: float | None = None
    x_lo: float | None = None
    n_cheb: int | None = None
    series_order: float | None = None
    n_grid: int | None = None
    quad_tol: float = 1e-12
    imag_tol: float = 0.1


@dataclass(frozen=True)
class TransferMatrix:
    entries: np.ndarray          # 2x2 real
    E: float
    h: float
    sigma: float
    imag_defect: float

    @property
    def det(self) -> float:
        e = self.entries
        return float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])

    @property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.sigma, self.h)

    @property
    def distance_to_rotation(self) -> float:
        return float(np.linalg.norm(self.entries - self.rotation, 2))


def rotation_matrix(sig: float, h: float) -> np.ndarray:
    """D_h: rotation by sigma/h, the zero-potential transfer matrix."""
    t = sig / h
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def _basis_from_data(d_plus, d_minus) -> np.ndarray:
    return np.array([[d_plus.value, d_minus.value],
                     [d_plus.h_derivative, d_minus.h_derivative]],
                    dtype=complex)


def connect(p: Potential, E: float, h: float,
            cfg: MatchConfig | None = None) -> TransferMatrix:
    """Build M(E, h) by the two change-of-basis solves at x_h."""
    if cfg is None:
        cfg = MatchConfig()
    icfg = interior.make_config(p, E, h, delta_int=cfg.delta_int,
                                eps=cfg.eps, n_grid=cfg.n_grid)
    x_h = icfg.x_h
    x_lo = cfg.x_lo if cfg.x_lo is not None else x_h
    if not x_lo <= x_h <= p.b:
        raise ConfigError(f"handover point {x_h} outside [{x_lo}, {p.b}]")

    qm = wkb_exterior.build_quasimode(p, E, cfg.n_terms, x_lo,
                                      n_cheb=cfg.n_cheb,
                                      series_order=cfg.series_order,
                                      quad_tol=cfg.quad_tol)
    m_ext_xh = _basis_from_data(
        wkb_exterior.evaluate_quasimode(qm, +1, h, x_h),
        wkb_exterior.evaluate_quasimode(qm, -1, h, x_h))
    m_ext_b = _basis_from_data(
        wkb_exterior.evaluate_quasimode(qm, +1, h, p.b),
        wkb_exterior.evaluate_quasimode(qm, -1, h, p.b))

    plus, minus = interior.solve_basis(p, icfg)
    m_int_xh = _basis_from_data(
        interior.cauchy_at_matching(plus, p, icfg),
        interior.cauchy_at_matching(minus, p, icfg))
    root_e = math.sqrt(E)
    c0 = np.array([[1.0, 1.0], [1j * root_e, -1j * root_e]])

    for name, m in (("interior basis at x_h", m_int_xh),
                    ("exterior basis at b", m_ext_b)):
        c = np.linalg.cond(m)
        if not c < _COND_LIMIT:
            raise IllConditionedBasis(f"{name} has condition number {c:.3e}")

    inner = np.linalg.solve(m_int_xh, m_ext_xh)
    inner = np.linalg.solve(m_ext_b.T, inner.T).T
    gap_b = E - float(v_at(p, p.b))
    n0 = np.array([[E ** 0.25, 0.0], [0.0, E ** -0.25]])
    nb_inv = np.array([[gap_b ** -0.25, 0.0], [0.0, gap_b ** 0.25]])
    m_complex = n0 @ c0 @ inner @ nb_inv

    defect = float(np.max(np.abs(m_complex.imag)))
    if defect > cfg.imag_tol:
        raise ToleranceExceeded(
            f"imaginary defect {defect:.3e} exceeds bound {cfg.imag_tol:.3e}")
    return TransferMatrix(np.ascontiguousarray(m_complex.real), float(E),
                          float(h), sigma(p, E, cfg.quad_tol), defect)


def dump_transfer(tms) -> str:
    """CSV rows 'h, E, m11, m12, m21, m22, det, imag_defect'."""
    lines = ["h,E,m11,m12,m21,m22,det,imag_defect"]
    for t in tms:
        e = t.entries
        lines.append(",".join(f"{v:.17g}" for v in
                              (t.h, t.E, e[0, 0], e[0, 1], e[1, 0], e[1, 1],
                               t.det, t.imag_defect)))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorrectionFit:
    """Entrywise lattice coefficients of M - D_h.

    a_plus[i] and a_minus[i] are the 2x2 coefficient blocks of
    cos(sigma/h) h^e_i and sin(sigma/h) h^e_i; pairs[i] is the smallest
    (m, n) with m gamma + n = e_i (the lattice may be degenerate).
    """

    exponents: tuple
    pairs: tuple
    a_plus: np.ndarray           # (n_exp, 2, 2)
    a_minus: np.ndarray
    residual: np.ndarray         # (2, 2) relative residuals
    h_grid: tuple


def _lattice(gamma: float, max_m: int, max_n: int):
    """Distinct exponents m gamma + n, (m, n) != (0, 0), with witnesses."""
    found: dict[float, tuple] = {}
    for m in range(max_m + 1):
        for n in range(max_n + 1):
            if m == 0 and n == 0:
                continue
            e = m * gamma + n
            for known in found:
                if abs(known - e) < 1e-12:
                    e = known
                    break
            if e not in found or (m, n) < found[e]:
                found[e] = (m, n)
    exps = sorted(found)
    return exps, [found[e] for e in exps]


def fit_corrections(p: Potential, E: float, h_grid, max_m: int, max_n: int,
                    cfg: MatchConfig | None = None) -> CorrectionFit:
    """Least squares for M(h) - D(h) over the exponent lattice."""
    h_grid = sorted(float(h) for h in h_grid)
    exps, pairs = _lattice(p.gamma, max_m, max_n)
    n_cols = 2 * len(exps)
    if len(h_grid) < 2 * n_cols:
        raise ConfigError(
            f"need at least {2 * n_cols} h points for {n_cols} coefficients")

    tms = [connect(p, E, h, cfg) for h in h_grid]
    sig = tms[0].sigma
    hs = np.array(h_grid)
    design = np.empty((len(hs), n_cols))
    for i, e in enumerate(exps):
        design[:, 2 * i] = np.cos(sig / hs) * hs ** e
        design[:, 2 * i + 1] = np.sin(sig / hs) * hs ** e
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise RankDeficient(
            f"design matrix singular (sv ratio {sv[-1] / sv[0]:.3e}); "
            "widen or refine the h grid")

    a_plus = np.zeros((len(exps), 2, 2))
    a_minus = np.zeros((len(exps), 2, 2))
    resid = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            y = np.array([t.entries[i, j] - t.rotation[i, j] for t in tms])
            coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
            a_plus[:, i, j] = coef[0::2]
            a_minus[:, i, j] = coef[1::2]
            scale = float(np.linalg.norm(y))
            resid[i, j] = (float(np.linalg.norm(design @ coef - y))
                           / max(scale, 1e-300))
    return CorrectionFit(tuple(exps), tuple(pairs), a_plus, a_minus, resid,
                         tuple(h_grid))


def dump_fit(fit: CorrectionFit) -> str:
    """CSV rows 'entry, m, n, a_plus, a_minus'."""
    lines = ["entry,m,n,a_plus,a_minus"]
    for idx, (m, n) in enumerate(fit.pairs):
        for i in range(2):
            for j in range(2):
                lines.append(f"m{i + 1}{j + 1},{m},{n},"
                             f"{fit.a_plus[idx, i, j]:.17g},"
                             f"{fit.a_minus[idx, i, j]:.17g}")
    return "\n".join(lines) + "\n"


def smallest_active_exponent(p: Potential, E: float, h_grid,
                             cfg: MatchConfig | None = None,
                             e_lo: float = 0.2, e_hi: float = 1.0,
                             step: float = 0.01) -> float:
    """Free-exponent measurement of the leading decay of M - D_h.

    Fits the one-term model (a+ cos(sigma/h) + a- sin(sigma/h)) h^e per
    entry for each trial e on a uniform scan and returns the e with the
    smallest total relative residual.  Deliberately ignores the lattice,
    so the lattice prediction can be tested against it.
    """
    h_grid = sorted(float(h) for h in h_grid)
    tms = [connect(p, E, h, cfg) for h in h_grid]
    sig = tms[0].sigma
    hs = np.array(h_grid)
    y = np.array([t.entries - t.rotation for t in tms])   # (n_h, 2, 2)
    best_e, best_r = None, np.inf
    for e in np.arange(e_lo, e_hi + 0.5 * step, step):
        design = np.column_stack([np.cos(sig / hs) * hs ** e,
                                  np.sin(sig / hs) * hs ** e])
        total = 0.0
        for i in range(2):
            for j in range(2):
                coef, _, _, _ = np.linalg.lstsq(design, y[:, i, j], rcond=None)
                total += float(np.sum((design @ coef - y[:, i, j]) ** 2))
        if total < best_r:
            best_r, best_e = total, float(e)
    return best_e
