import math

import numpy as np
import pytest
from conftest import assert_slope

from swkb import oracle
from swkb.errors import ConfigError, ToleranceExceeded
from swkb.matching import (
    MatchConfig,
    connect,
    dump_fit,
    dump_transfer,
    fit_corrections,
    rotation_matrix,
    smallest_active_exponent,
)
from swkb.potential import WModel, make_potential, v_at
from swkb.wkb_exterior import CauchyDatum


@pytest.fixture(scope="module")
def p_half_const():
    # gamma = 1/2, W = 1: the cleanest fractional lattice
    return make_potential(0.5, 1.0, WModel("constant", (1.0,)))


def test_free_collapses_to_rotation(p_free):
    for E, h in ((1.0, 1e-1), (2.7, 1e-2)):
        tm = connect(p_free, E, h)
        t = math.sqrt(E) / h          # sigma = b sqrt(E), b = 1
        want = np.array([[math.cos(t), -math.sin(t)],
                         [math.sin(t), math.cos(t)]])
        np.testing.assert_allclose(tm.entries, want, atol=1e-12)
        assert tm.det == pytest.approx(1.0, abs=1e-12)
        assert tm.imag_defect <= 1e-12
        assert tm.distance_to_rotation <= 1e-12


def test_rotation_matrix_basics():
    r = rotation_matrix(0.3, 0.1)
    np.testing.assert_allclose(r @ r.T, np.eye(2), atol=1e-15)
    assert np.linalg.det(r) == pytest.approx(1.0)
    r2 = rotation_matrix(0.6, 0.2)
    np.testing.assert_allclose(r, r2, atol=1e-15)


def test_agrees_with_oracle_transfer(p_lin):
    # independent route: march both normalized basis vectors b -> 0 with
    # the ODE oracle and renormalize at 0
    E, h = 2.0, 1e-2
    tm = connect(p_lin, E, h)
    assert abs(tm.det - 1.0) <= 1e-6
    gap_b = E - v_at(p_lin, p_lin.b)
    nb_inv = np.array([[gap_b ** -0.25, 0.0], [0.0, gap_b ** 0.25]])
    n0 = np.array([[E ** 0.25, 0.0], [0.0, E ** -0.25]])
    cols = np.empty((2, 2), dtype=complex)
    for j in range(2):
        d = CauchyDatum(complex(nb_inv[0, j]), complex(nb_inv[1, j]),
                        p_lin.b, h)
        out = oracle.propagate(p_lin, E, h, p_lin.b, 0.0, d)
        cols[0, j], cols[1, j] = out.value, out.h_derivative
    m_oracle = (n0 @ cols).real
    assert np.max(np.abs(tm.entries - m_oracle)) <= 1e-7


def test_det_and_imag_defect_sweep(p_half, p_lin):
    for p in (p_half, p_lin):
        for h in (5e-2, 1e-2, 3e-3):
            tm = connect(p, 2.5, h)
            assert abs(tm.det - 1.0) <= 1e-6
            norm = float(np.linalg.norm(tm.entries, 2))
            assert tm.imag_defect <= 1e-6 * norm


def test_distance_to_rotation_rate(p_half_const):
    # leading lattice exponent min(gamma, 1) = 1/2
    hs = np.logspace(-2.5, -1, 6)
    dists = [connect(p_half_const, 2.0, h).distance_to_rotation for h in hs]
    assert_slope(hs, dists, 0.5 - 0.1)


def test_fit_free_is_zero(p_free):
    # high lattice exponents amplify the ~1e-15 rotation defect through
    # tiny design columns, so the zero check uses the (1, 1) lattice
    hs = np.logspace(np.log10(5e-3), np.log10(1e-1), 12)
    fit = fit_corrections(p_free, 2.0, hs, 1, 1)
    assert float(np.max(np.abs(fit.a_plus))) <= 1e-8
    assert float(np.max(np.abs(fit.a_minus))) <= 1e-8


def test_fit_lattice_degeneracy_gamma_one(p_lin):
    # integer gamma collapses the lattice; witness pairs keep the
    # smallest (m, n) and the two parameterizations fit identically
    hs = np.logspace(np.log10(2e-3), np.log10(1e-1), 16)
    f1 = fit_corrections(p_lin, 2.0, hs, 2, 2)
    f2 = fit_corrections(p_lin, 2.0, hs, 0, 4)
    assert f1.exponents == (1.0, 2.0, 3.0, 4.0)
    assert f1.exponents == f2.exponents
    assert len(set(f1.exponents)) == len(f1.exponents)
    np.testing.assert_allclose(f1.a_plus, f2.a_plus, atol=1e-12)
    np.testing.assert_allclose(f1.a_minus, f2.a_minus, atol=1e-12)
    assert f1.pairs[0] == (0, 1)


def test_fit_needs_enough_points(p_lin):
    with pytest.raises(ConfigError):
        fit_corrections(p_lin, 2.0, (1e-2, 2e-2, 4e-2), 2, 2)


def test_smallest_active_exponent_half(p_half_const):
    hs = np.logspace(np.log10(1e-2), np.log10(6e-2), 8)
    e_best = smallest_active_exponent(p_half_const, 2.0, hs)
    assert 0.4 <= e_best <= 0.6


def test_eps_independence(p_lin):
    a = connect(p_lin, 2.0, 2e-2)
    b = connect(p_lin, 2.0, 2e-2, MatchConfig(eps=0.125))
    assert np.max(np.abs(a.entries - b.entries)) <= 1e-8


def test_imag_tolerance_guard(p_lin):
    with pytest.raises(ToleranceExceeded):
        connect(p_lin, 2.0, 1e-2, MatchConfig(imag_tol=1e-20))


def test_handover_outside_cheb_range(p_lin):
    # x_lo above x_h leaves the quasimode undefined at the handover
    with pytest.raises(ConfigError):
        connect(p_lin, 2.0, 1e-2, MatchConfig(x_lo=0.5))


def test_dump_formats(p_lin):
    tms = [connect(p_lin, 2.0, h) for h in (5e-2, 2e-2)]
    text = dump_transfer(tms)
    lines = text.strip().split("\n")
    assert lines[0] == "h,E,m11,m12,m21,m22,det,imag_defect"
    assert len(lines) == 3
    row = [float(tok) for tok in lines[1].split(",")]
    assert row[0] == 5e-2 and row[1] == 2.0
    hs = np.logspace(np.log10(2e-3), np.log10(1e-1), 16)
    fit = fit_corrections(p_lin, 2.0, hs, 1, 1)
    ftext = dump_fit(fit)
    flines = ftext.strip().split("\n")
    assert flines[0] == "entry,m,n,a_plus,a_minus"
    assert len(flines) == 1 + 4 * len(fit.exponents)
