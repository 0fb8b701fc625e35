import math
from fractions import Fraction

import numpy as np
import pytest

from wpkit.errors import DomainError
from wpkit.quadrature import quad
from wpkit.tracefn import (
    BoundConstants,
    TestFunctionFamily,
    cancellation_check,
    d_operator_on_exp_poly,
    fourier_direct,
    fourier_h,
    fourier_hl,
    h0,
    h_eval,
    hl_eval,
    pipeline,
    spectral_lower_bound,
)


def test_bump_properties():
    assert h0(0.5) == 0.0 and h0(-0.6) == 0.0
    assert h_eval(0.0) > 0.0
    assert h_eval(1.0) == 0.0 and h_eval(-1.2) == 0.0
    xs = np.linspace(-0.99, 0.99, 21)
    for x in xs:
        assert h_eval(x) >= 0.0
        assert abs(h_eval(x) - h_eval(-x)) < 1e-15


def test_dilation_support_and_mass():
    scale = 7.0
    assert hl_eval(scale * 1.01, scale) == 0.0
    assert hl_eval(0.0, scale) == h_eval(0.0)
    mass = quad(lambda x: h_eval(x), -1.0, 1.0, tol=1e-12)
    mass_l = quad(lambda x: hl_eval(x, scale), -scale, scale, tol=1e-12)
    assert abs(mass_l - scale * mass) < 1e-10


def test_hat_nonnegativity_samples():
    for r in np.linspace(-50.0, 50.0, 41):
        assert fourier_h(r) >= -1e-12
    for t in np.linspace(-0.5, 0.5, 21):
        assert fourier_h(1j * t) >= -1e-12


def test_dilation_identity_dual_path():
    scale = 10.0
    for r in (0.0, 0.35, 1.0, 3.0):
        base = fourier_hl(r, scale)
        direct = fourier_direct(lambda x: hl_eval(x, scale), r, scale, tol=1e-12)
        assert abs(base - direct) < 1e-10


def test_h_hat_big():
    fam0 = TestFunctionFamily(10.0, 0)
    assert fam0.hat(0.7) == fourier_hl(0.7, 10.0)
    fam2 = TestFunctionFamily(10.0, 2)
    assert fam2.hat(0.5j) == 0.0  # (1/4 + r^2)^m vanishes at r = i/2
    # dual path: transform the physically differentiated family
    for r in (0.0, 1.0, 0.25j):
        a = fam2.hat(r)
        b = fourier_direct(fam2.d_power_h_l, r, 10.0, tol=1e-11)
        assert abs(a - b) <= 1e-6 * max(abs(a), 1e-12)


def test_d_operator_recurrence():
    # D[x^k e^(x/2)] = -(k(k-1) x^(k-2) + k x^(k-1)) e^(x/2)
    assert d_operator_on_exp_poly((0, 0, 1)) == (Fraction(-2), Fraction(-2))
    assert d_operator_on_exp_poly((1,)) == (Fraction(0),)


def test_cancellation_subset():
    for k, m, scale in ((0, 1, 5.0), (1, 2, 10.0), (2, 3, 15.0), (3, 4, 10.0)):
        value, reference, method = cancellation_check(k, m, scale)
        assert abs(value) < 1e-8 * math.exp(scale / 2.0), (k, m, scale, method)
        assert reference > 0
    value, reference, method = cancellation_check(0, 3, 10.0)
    assert method == "symbolic-annihilation" and value == 0.0
    # k >= m: genuinely nonzero but polynomially small against the reference
    value, reference, method = cancellation_check(2, 2, 10.0)
    assert method == "quadrature"
    assert 0 < abs(value) < 0.3 * reference


def test_spectral_lower_bound():
    # growth slope carries a -sqrt(s/L) deficit, so the asymptotic value
    # emerges at large L; slopes must increase toward s
    values, slopes, c_eps = spectral_lower_bound(0.0, 0.01, (100.0, 300.0, 600.0))
    assert slopes[0] < slopes[1] < 0.5
    assert abs(slopes[-1] - 0.5) < 0.06  # s = 1/2 at lambda1 = 0
    assert c_eps > 0
    assert fourier_hl(0.5j, 10.0) > fourier_hl(1j / 6.0, 10.0)
    lam = 2.0 / 9.0 - 0.01
    _, slopes, _ = spectral_lower_bound(lam, 0.01, (200.0, 400.0, 600.0))
    assert slopes[-1] >= 1.0 / 6.0  # clears alpha = 1/6 with the eps margin
    with pytest.raises(DomainError):
        spectral_lower_bound(0.3, 0.01, (5.0, 10.0))


def test_pipeline_exact():
    constants = BoundConstants(eps=Fraction(1, 20), kappa=Fraction(1, 100))
    report = pipeline(constants)
    assert report["main_term_exponent"] == Fraction(-1, 20)
    assert report["exponent_arithmetic_consistent"]
    assert report["alpha_identity"]
    assert report["markov_factor_is_lambda_power"]
    assert report["tangle_probability_terms"]["g_power"] == (
        Fraction(3, 2) * Fraction(1, 100) - 1
    )
    assert report["tangle_probability_terms"]["g_power_vanishes"]
    assert report["limsup_kappa_exponent"] == 2
    # kappa >= 2/3 keeps the tangle g-power alive
    wide = pipeline(BoundConstants(eps=Fraction(1, 20), kappa=Fraction(3, 4)))
    assert not wide["tangle_probability_terms"]["g_power_vanishes"]
    # custom assumed input is flagged as inconsistent bookkeeping
    odd = pipeline(
        BoundConstants(eps=Fraction(1, 20), kappa=Fraction(1, 100),
                       assumed_trace_exponent=Fraction(2))
    )
    assert not odd["exponent_arithmetic_consistent"]


def test_pipeline_validation():
    with pytest.raises(DomainError):
        BoundConstants(eps=Fraction(0), kappa=Fraction(1, 10))
    with pytest.raises(DomainError):
        BoundConstants(eps=Fraction(1, 10), kappa=Fraction(2))
