"""Lattice-expansion algebra: randomized identities plus pinned examples."""

import math

import numpy as np
import pytest

from swkb import gte
from swkb.errors import ExponentMinusOne, GammaMismatch
from swkb.potential import WModel, make_potential

GAMMAS = (0.5, 1.0, 1.5, 2.0 / 3.0, 0.7310578559)
N_ROUNDS = 250   # x4 checks per round = 1000 randomized property checks


def _random_expansion(rng, gamma, order, lowest_j=0):
    items = []
    for _ in range(int(rng.integers(1, 5))):
        m = int(rng.integers(0, 4))
        j = int(rng.integers(lowest_j, 4))
        a = complex(rng.standard_normal(), rng.standard_normal())
        items.append((m, j, a))
    return gte.from_terms(gamma, order, items)


def _eval_terms(u, x):
    # independent evaluation straight off the lattice pairs
    return sum(a * x ** (m * u.gamma + j) for m, j, a in u.terms)


def test_randomized_algebra_suite():
    rng = np.random.default_rng(7241)
    for round_idx in range(N_ROUNDS):
        gamma = GAMMAS[round_idx % len(GAMMAS)]
        # order high enough that no product term is truncated
        order = 2.0 * (3.0 * gamma + 3.0) + 1.0
        u = _random_expansion(rng, gamma, order)
        v = _random_expansion(rng, gamma, order)
        x = float(rng.uniform(0.05, 0.9))

        # 1: linearity of add
        cu = complex(rng.standard_normal(), rng.standard_normal())
        s = gte.add(u, v, cu, 2.0)
        ref = cu * _eval_terms(u, x) + 2.0 * _eval_terms(v, x)
        assert abs(gte.evaluate(s, x) - ref) <= 1e-12 * max(1.0, abs(ref))

        # 2: mul evaluates to the product and obeys the sumset law
        w = gte.mul(u, v)
        ref = _eval_terms(u, x) * _eval_terms(v, x)
        assert abs(gte.evaluate(w, x) - ref) <= 1e-12 * max(1.0, abs(ref))
        sumset = {
            gte.canonical_pair(gamma, mu + mv, ju + jv)
            for mu, ju, _ in u.terms for mv, jv, _ in v.terms
        }
        assert {(m, j) for m, j, _ in w.terms} <= sumset

        # 3: differentiate is the termwise alpha shift
        d = gte.differentiate(u)
        ref = sum(a * (m * gamma + j) * x ** (m * gamma + j - 1.0)
                  for m, j, a in u.terms if (m, j) != (0, 0))
        assert abs(gte.evaluate(d, x) - ref) <= 1e-12 * max(1.0, abs(ref))

        # 4: derivative/antiderivative round trip, exact termwise algebra
        c = complex(rng.standard_normal())
        anti = gte.antiderivative_from_b(u, c)
        back = gte.differentiate(anti)
        for m, j, a in u.terms:
            assert abs(back.coefficient(m, j) + a) <= 1e-14 * max(1.0, abs(a))
        assert abs(anti.coefficient(0, 0) - c) <= 1e-14


def test_rational_gamma_canonicalization():
    # gamma = 1/2: (2, 0) and (0, 1) are the same exponent and must merge
    u = gte.from_terms(0.5, 8.0, [(2, 0, 1.5), (0, 1, 2.5)])
    assert len(u.terms) == 1
    assert u.coefficient(2, 0) == pytest.approx(4.0)
    assert u.coefficient(0, 1) == pytest.approx(4.0)
    assert gte.evaluate(u, 0.3) == pytest.approx(4.0 * 0.3, rel=1e-15)


def test_canonical_pair_examples():
    assert gte.canonical_pair(0.5, 2, 0) == (0, 1)
    assert gte.canonical_pair(0.5, 3, -1) == (1, 0)
    assert gte.canonical_pair(1.5, 2, 0) == (0, 3)
    # irrational gamma: no lattice relation, pair unchanged
    assert gte.canonical_pair(0.7310578559, 5, -2) == (5, -2)


def test_mul_cancellation_example():
    one_plus = gte.from_terms(0.5, 4.0, [(0, 0, 1.0), (1, 0, 1.0)])
    one_minus = gte.from_terms(0.5, 4.0, [(0, 0, 1.0), (1, 0, -1.0)])
    prod = gte.mul(one_plus, one_minus)
    assert prod.coefficient(0, 0) == pytest.approx(1.0)
    assert prod.coefficient(1, 0) == 0.0
    assert prod.coefficient(2, 0) == pytest.approx(-1.0)


def test_compose_power_identity_alpha_one():
    p = make_potential(0.5, 1.0, WModel("polynomial", (2.0, -0.25)))
    u = gte.compose_power(p, 3.0, 1.0, 6.0)
    assert u.coefficient(0, 0) == pytest.approx(3.0)
    assert u.coefficient(1, 0) == pytest.approx(-2.0)
    assert u.coefficient(1, 1) == pytest.approx(0.25)


def test_compose_power_classical_sqrt():
    # sqrt(1 - x) = 1 - x/2 - x^2/8 - x^3/16 - 5 x^4/128
    p = make_potential(1.0, 1.0, WModel("constant", (1.0,)))
    u = gte.compose_power(p, 1.0, 0.5, 6.0)
    want = {0: 1.0, 1: -0.5, 2: -0.125, 3: -1.0 / 16.0, 4: -5.0 / 128.0}
    for n, c in want.items():
        assert u.coefficient(0, n) == pytest.approx(c, rel=1e-13), n


def test_compose_power_quarter_root_coefficient():
    # (2 - x^{1/2})^{-1/4}: x^{1/2} coefficient is 2^{-1/4}/8
    p = make_potential(0.5, 1.0, WModel("constant", (1.0,)))
    u = gte.compose_power(p, 2.0, -0.25, 4.0)
    assert complex(u.coefficient(1, 0)).real == pytest.approx(
        2.0 ** -0.25 / 8.0, rel=1e-13)


def test_compose_power_inverse_pair():
    for gamma, alpha in ((0.5, -0.25), (1.0, 0.25), (1.5, -0.5)):
        p = make_potential(gamma, 1.0, WModel("polynomial", (1.0, 0.5)))
        order = 6.0 + 2.0 * gamma
        u = gte.compose_power(p, 2.5, alpha, order)
        v = gte.compose_power(p, 2.5, -alpha, order)
        prod = gte.mul(u, v)
        assert prod.coefficient(0, 0) == pytest.approx(1.0, abs=1e-12)
        others = [abs(a) for m, j, a in prod.terms if (m, j) != (0, 0)]
        assert max(others, default=0.0) <= 1e-12


def test_compose_power_matches_direct_evaluation():
    p = make_potential(1.0, 1.0, WModel("constant", (1.0,)))
    u = gte.compose_power(p, 2.0, 0.5, 8.0)
    x = 0.1
    assert gte.evaluate(u, x) == pytest.approx(math.sqrt(2.0 - x), abs=1e-8)


def test_differentiate_vs_finite_differences():
    p = make_potential(0.5, 1.0, WModel("polynomial", (1.0, 0.5)))
    u = gte.compose_power(p, 2.5, -0.25, 8.0)
    d = gte.differentiate(u)
    for x in (1e-2, 1e-3):
        s = 1e-6 * x
        fd = (gte.evaluate(u, x + s) - gte.evaluate(u, x - s)) / (2 * s)
        assert complex(gte.evaluate(d, x)).real == pytest.approx(
            complex(fd).real, rel=1e-6)


def test_antiderivative_reproduces_t_correction():
    from swkb.potential import t_correction

    p = make_potential(0.5, 1.0, WModel("polynomial", (1.0, 0.5)))
    e = 2.5
    root = gte.compose_power(p, e, 0.5, 8.0)
    integrand = gte.add(root, gte.constant(0.5, 8.0, math.sqrt(e)), 1.0, -1.0)
    # T(x) = int_0^x (sqrt(E-V) - sqrt(E)) = int-from-b form with the
    # constant chosen so T(0) = 0
    u = gte.antiderivative_from_b(integrand, 0.0)
    shift = complex(gte.evaluate(u, 1e-12)).real
    for x in (1e-3, 1e-2):
        got = complex(gte.evaluate(u, x)).real - shift
        assert -got == pytest.approx(t_correction(p, e, x), abs=1e-8)


def test_antiderivative_guards():
    u = gte.from_terms(1.0, 4.0, [(0, -1, 1.0)])
    with pytest.raises(ExponentMinusOne):
        gte.antiderivative_from_b(u, 0.0)
    # gamma = 1/2 lattice hit of -1: (2, -2) ~ exponent -1
    v = gte.from_terms(0.5, 4.0, [(2, -2, 1.0)])
    with pytest.raises(ExponentMinusOne):
        gte.antiderivative_from_b(v, 0.0)


def test_gamma_mismatch_guard():
    u = gte.constant(1.0, 4.0, 1.0)
    v = gte.constant(0.5, 4.0, 1.0)
    with pytest.raises(GammaMismatch):
        gte.add(u, v)
    with pytest.raises(GammaMismatch):
        gte.mul(u, v)


def test_truncation_drops_high_exponents():
    u = gte.from_terms(1.0, 3.0, [(0, 0, 1.0), (0, 5, 2.0)])
    assert u.coefficient(0, 5) == 0.0
    v = gte.mul(gte.from_terms(1.0, 3.0, [(0, 2, 1.0)]),
                gte.from_terms(1.0, 3.0, [(0, 2, 1.0)]))
    assert v.terms == ()


def test_evaluate_at_zero():
    u = gte.from_terms(0.5, 4.0, [(0, 0, 2.0), (1, 0, 1.0)])
    assert gte.evaluate(u, 0.0) == pytest.approx(2.0)
    w = gte.from_terms(0.5, 4.0, [(1, -1, 1.0)])
    with pytest.raises(ZeroDivisionError):
        gte.evaluate(w, 0.0)


def test_dump_format():
    u = gte.from_terms(0.5, 4.0, [(1, 0, 0.5), (0, 1, 1.0 + 2.0j)])
    lines = gte.dump(u).splitlines()
    assert lines[0] == "1 0 0.5"
    assert lines[1].startswith("0 1 1")
