import math

import numpy as np
import pytest
from conftest import assert_slope
from scipy.optimize import brentq

from swkb import oracle
from swkb.matching import MatchConfig
from swkb.potential import EnergyWindow, WModel, make_potential, sigma
from swkb.spectral import (
    bs_leading,
    convergence_study,
    dump_eigenvalues,
    dump_study,
    eigenvalues_matched,
    quantization_function,
)


def test_free_ladder_both_methods(p_free):
    win = EnergyWindow(1.0, 9.0)
    h = 0.1
    bs = bs_leading(p_free, win, h)
    ma = eigenvalues_matched(p_free, win, h)
    assert [k for k, _ in bs.eigenvalues] == list(range(4, 10))
    assert [k for k, _ in ma.eigenvalues] == list(range(4, 10))
    for res in (bs, ma):
        for k, e in res.eigenvalues:
            assert e == pytest.approx((k * math.pi * h) ** 2, abs=1e-10)


def test_quantization_function_free(p_free):
    # M_12 = -sin(sqrt(E)/h) for V == 0
    for e in (1.3, 2.0, 5.7):
        f = quantization_function(p_free, e, 0.05)
        assert f == pytest.approx(-math.sin(math.sqrt(e) / 0.05), abs=1e-12)


def test_bs_polish_tolerance(p_lin, win23):
    h = 1e-2
    res = bs_leading(p_lin, win23, h)
    assert len(res.eigenvalues) >= 3
    for k, e in res.eigenvalues:
        assert abs(sigma(p_lin, e) - k * math.pi * h) <= 1e-12


def test_bs_closed_form_gamma_one(p_lin, win23):
    # sigma(E) = (2/3)(E^(3/2) - (E-1)^(3/2)) for V = x on [0, 1]
    h = 1e-2
    res = bs_leading(p_lin, win23, h)

    def closed(e, k):
        return 2.0 / 3.0 * (e ** 1.5 - (e - 1.0) ** 1.5) - k * math.pi * h

    for k, e in res.eigenvalues:
        want = brentq(closed, 2.0, 3.0, args=(k,), xtol=1e-14)
        assert e == pytest.approx(want, abs=1e-10)


def test_matched_vs_oracle(p_lin):
    win = EnergyWindow(2.0, 2.5)
    h = 5e-3
    ma = eigenvalues_matched(p_lin, win, h).by_k()
    ref = oracle.eigenvalues(p_lin, win, h).by_k()
    common = sorted(set(ma) & set(ref))
    assert len(common) >= 10
    worst = max(abs(ma[k] - ref[k]) for k in common)
    assert worst <= 1e-6


def test_weyl_count(p_lin, win23):
    for h in (2e-2, 1e-2):
        n_weyl = (sigma(p_lin, 3.0) - sigma(p_lin, 2.0)) / (math.pi * h)
        for res in (bs_leading(p_lin, win23, h),
                    oracle.eigenvalues(p_lin, win23, h)):
            assert abs(len(res.eigenvalues) - n_weyl) <= 1.0


def test_matched_roots_interlace(p_lin, win23):
    h = 2e-2
    res = eigenvalues_matched(p_lin, win23, h)
    es = [e for _, e in res.eigenvalues]
    assert all(b > a for a, b in zip(es, es[1:]))
    # simple roots: F alternates sign at the midpoints
    mids = [0.5 * (a + b) for a, b in zip(es, es[1:])]
    signs = [math.copysign(1.0, quantization_function(p_lin, m, h))
             for m in mids]
    assert all(s2 == -s1 for s1, s2 in zip(signs, signs[1:]))


def test_method_consistency_rate(p_half):
    # matched corrects the leading ladder at order h^(1 + gamma)
    win = EnergyWindow(2.0, 2.5)
    hs = (1e-2, 5e-3, 2.5e-3)
    gaps = []
    for h in hs:
        bs = bs_leading(p_half, win, h).by_k()
        ma = eigenvalues_matched(p_half, win, h).by_k()
        common = sorted(set(bs) & set(ma))
        assert common
        gaps.append(max(abs(bs[k] - ma[k]) for k in common))
    assert_slope(hs, gaps, 1.5 - 0.2, 1.5 + 0.2)


def test_convergence_study_structure(p_lin, win23):
    rep = convergence_study(p_lin, win23, (2e-2, 1e-2))
    assert rep.warnings == ()
    methods = {m for _, m, _, _ in rep.rows}
    assert methods == {"bs_leading", "matched"}
    assert set(rep.slopes) == methods
    for h, _m, err, n in rep.rows:
        assert h in (2e-2, 1e-2)
        assert err >= 0.0 and n > 0
    # bs error is dominated by the h^2 correction term
    assert 1.5 <= rep.slopes["bs_leading"] <= 2.5
    assert rep.slopes["matched"] == "floor" or rep.slopes["matched"] > 2.0


def test_convergence_study_floor(p_free):
    # both methods are exact for V == 0, errors sit at the root tolerance
    win = EnergyWindow(1.0, 4.0)
    rep = convergence_study(p_free, win, (5e-2, 2e-2))
    assert rep.slopes["bs_leading"] == "floor"
    assert rep.slopes["matched"] == "floor"


def test_dump_formats(p_free):
    win = EnergyWindow(1.0, 4.0)
    res = bs_leading(p_free, win, 5e-2)
    lines = dump_eigenvalues(res).strip().split("\n")
    assert lines[0] == "h,method,k,E"
    assert len(lines) == 1 + len(res.eigenvalues)
    toks = lines[1].split(",")
    assert toks[1] == "bs_leading" and int(toks[2]) >= 1
    rep = convergence_study(p_free, win, (5e-2, 2e-2))
    slines = dump_study(rep).strip().split("\n")
    assert slines[0] == "h,method,max_err,fitted_slope"
    assert len(slines) == 5
