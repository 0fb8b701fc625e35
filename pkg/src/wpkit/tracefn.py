"""Trace-method test functions and the exponent-bookkeeping pipeline.

The base bump is the self-convolution h = h0 * h0 of
h0(x) = exp(-1/(1 - 4x^2)) on (-1/2, 1/2), so that

    h >= 0, even, supported on [-1, 1],
    hat h = (hat h0)^2 >= 0 on R, and
    hat h(it) = (2 int_0^1/2 h0 cosh(tx) dx)^2 >= 0 on the imaginary axis,

exactly the admissibility the spectral bound needs, with no search.
Dilates are h_L(x) = h(x/L) and the regularised family is
H_{L,m} = (1/4 - d^2/dx^2)^m h_L, evaluated pointwise through exact
rational derivative recurrences for h0 (all derivatives of h0 are rational
multiples of h0, and derivatives of the convolution split between the two
factors).

The pipeline reproduces the bound chain of the spectral-gap argument in
exact rational exponent arithmetic: an assumed trace-average exponent
1 + 5 eps, Markov division by C_eps kappa^m g^(1 + 6 eps), additive
tangle-probability terms kappa^2 + g^(3 kappa / 2 - 1), and the exact
identity (1/6)^2 + 2/9 = 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import DomainError
from .quadrature import quad

# ----------------------------------------------------------------------
# the base bump and its derivatives


def h0(x):
    if abs(x) >= 0.5:
        return 0.0
    return math.exp(-1.0 / (1.0 - 4.0 * x * x))


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_add(a, b):
    n = max(len(a), len(b))
    return [
        (a[i] if i < len(a) else Fraction(0)) + (b[i] if i < len(b) else Fraction(0))
        for i in range(n)
    ]


def _poly_diff(a):
    return [i * a[i] for i in range(1, len(a))] or [Fraction(0)]


_D = [Fraction(1), Fraction(0), Fraction(-4)]  # 1 - 4 x^2
_DP = [Fraction(0), Fraction(-8)]  # -8 x


@lru_cache(maxsize=None)
def _h0_deriv_numerator(q):
    """P_q with h0^(q) = P_q(x) / (1 - 4 x^2)^(2q) * h0(x)."""
    if q == 0:
        return (Fraction(1),)
    p = list(_h0_deriv_numerator(q - 1))
    qq = q - 1
    # (P/D^2q)' = (P' D - 2q P D') / D^(2q+1); multiply num and den by D
    term = _poly_mul(_poly_add(_poly_mul(_poly_diff(p), _D),
                               [-2 * qq * c for c in _poly_mul(p, _DP)]), _D)
    term = _poly_add(term, _poly_mul(p, _DP))
    return tuple(term)


def h0_deriv(q, x):
    if abs(x) >= 0.5:
        return 0.0
    num = 0.0
    for c in reversed(_h0_deriv_numerator(q)):
        num = num * x + float(c)
    d = 1.0 - 4.0 * x * x
    return num / d ** (2 * q) * math.exp(-1.0 / d)


@lru_cache(maxsize=None)
def _h0_deriv_sup(q):
    return max(abs(h0_deriv(q, -0.5 + 0.0005 * i)) for i in range(2001)) or 1.0


def h_deriv(p, x, rel_tol=1e-13):
    """p-th derivative of h = h0 * h0, splitting the derivatives between the
    two convolution factors; tolerance is relative to the factor magnitudes."""
    if abs(x) >= 1.0:
        return 0.0
    q1 = p // 2
    q2 = p - q1
    lo = max(-0.5, x - 0.5)
    hi = min(0.5, x + 0.5)
    scale = max(1e-30, _h0_deriv_sup(q1) * _h0_deriv_sup(q2) * (hi - lo))
    return quad(
        lambda t: h0_deriv(q1, t) * h0_deriv(q2, x - t), lo, hi,
        tol=rel_tol * scale, budget=200_000,
    )


def h_eval(x):
    """h(x) = (h0 * h0)(x), supported on [-1, 1]."""
    return h_deriv(0, x)


def hl_eval(x, scale):
    if scale <= 0:
        raise DomainError("L must be positive")
    return h_eval(x / scale)


# ----------------------------------------------------------------------
# Fourier transforms on R and on i[-1/2, 1/2]


def _kernel(r, x):
    """Re e^{irx} for r real or purely imaginary (given as complex)."""
    r = complex(r)
    if abs(r.imag) < 1e-300:
        return math.cos(r.real * x)
    if abs(r.real) < 1e-300:
        return math.cosh(r.imag * x)
    raise DomainError("r must lie on R or on the imaginary axis")


def fourier_h0(r, tol=1e-13):
    """hat h0(r) = 2 int_0^1/2 h0(x) kernel(r, x) dx (real for our r).

    The tolerance is taken relative to the sampled integrand magnitude so
    that large imaginary arguments (cosh-scale integrands) stay tractable.
    """
    scale = max(abs(h0(0.05 * i) * _kernel(r, 0.05 * i)) for i in range(10))
    return 2.0 * quad(
        lambda x: h0(x) * _kernel(r, x), 0.0, 0.5, tol=tol * max(1.0, 0.1 * scale)
    )


def fourier_h(r, tol=1e-13):
    """hat h(r) = (hat h0(r))^2: manifestly nonnegative on both domains."""
    v = fourier_h0(r, tol=tol)
    return v * v


def fourier_direct(f, r, support, tol=1e-11):
    """2 int_0^support f(x) kernel(r, x) dx for even real f: the
    independent transform path used by the cross-checks."""
    return 2.0 * quad(lambda x: f(x) * _kernel(r, x), 0.0, support, tol=tol)


def fourier_hl(r, scale, tol=1e-13):
    """hat h_L(r) = L hat h(L r), through the base-path transform."""
    return scale * fourier_h(scale * complex(r), tol=tol)


def h_hat_big(r, scale, m, tol=1e-13):
    """hat H_{L,m}(r) = (1/4 + r^2)^m hat h_L(r); real on both axes."""
    r = complex(r)
    factor = (0.25 + r * r) ** m
    if abs(factor.imag) > 1e-12 * abs(factor):
        raise DomainError("r must lie on R or on the imaginary axis")
    return factor.real * fourier_hl(r, scale, tol=tol)


# ----------------------------------------------------------------------
# the operator family H_{L,m} in physical space


@dataclass(frozen=True)
class TestFunctionFamily:
    """h, its dilate h_L and the regularisations D^m h_L."""

    __test__ = False  # "Test" prefix is mathematical, not pytest's

    scale: float  # L
    power: int = 0  # m

    def h(self, x):
        return h_eval(x)

    def h_l(self, x):
        return hl_eval(x, self.scale)

    def d_power_h_l(self, x):
        """(1/4 - d^2)^m h_L at x, via binomial expansion into h^(2i)."""
        total = 0.0
        for i in range(self.power + 1):
            total += (
                comb(self.power, i)
                * 0.25 ** (self.power - i)
                * (-1.0) ** i
                * self.scale ** (-2 * i)
                * h_deriv(2 * i, x / self.scale)
            )
        return total

    def hat(self, r, tol=1e-13):
        return h_hat_big(r, self.scale, self.power, tol=tol)


def d_operator_on_exp_poly(coeffs):
    """(1/4 - d^2) [P(x) e^(x/2)] = -(P'' + P') e^(x/2): returns the new
    polynomial coefficients (exact Fractions, low degree first)."""
    coeffs = [Fraction(c) for c in coeffs]
    d1 = _poly_diff(coeffs)
    d2 = _poly_diff(d1)
    return tuple(-c for c in _poly_add(d1, d2))


def cancellation_check(k, m, scale, tol_factor=1e-11):
    """int (D^m h_L)(x) x^k e^(x/2) dx and the unregularised comparison
    int h_L x^k e^(x/2) dx.

    D[x^k e^(x/2)] = -(k(k-1) x^(k-2) + k x^(k-1)) e^(x/2), so D^m
    annihilates x^k e^(x/2) when k < m.  Since h_L is smooth and compactly
    supported, integration by parts is boundary-free and the integral
    equals int (D^a h_L) (D^b [x^k e^(x/2)]) for any a + b = m.  The
    implementation takes the smallest a that keeps the weight polynomial
    alive (a <= 2 always suffices), so only derivatives of h up to order 4
    are ever quadrature-evaluated:

    * k <= m - 3: m - 2 applications already annihilate the weight; the
      integrand is identically zero and the verified value is exact 0;
    * k in {m-2, m-1}: a genuine quadrature of (D^a h_L) against the exact
      polynomial-in-x weight, which must come out ~0;
    * k >= m: all m applications land on the weight and the integral is a
      plain quadrature against h_L (the reported magnitude case).

    Returns (value, reference, method).
    """
    if k < 0 or m < 0:
        raise DomainError("need k, m >= 0")
    weight = [Fraction(0)] * k + [Fraction(1)]  # x^k
    b = min(m, max(k, m - 2) if k < m else m)
    for _ in range(b):
        weight = list(d_operator_on_exp_poly(weight))
    a = m - b

    def poly_weight(x):
        out = 0.0
        for c in reversed(weight):
            out = out * x + float(c)
        return out

    reference = quad(
        lambda x: hl_eval(x, scale) * x ** k * math.exp(x / 2.0),
        -scale,
        scale,
        tol=1e-12 * math.exp(scale / 2.0) * scale,
        budget=2_000_000,
    )
    if all(c == 0 for c in weight):
        return 0.0, reference, "symbolic-annihilation"

    fam = TestFunctionFamily(scale, a)
    value = quad(
        lambda x: fam.d_power_h_l(x) * poly_weight(x) * math.exp(x / 2.0),
        -scale,
        scale,
        tol=tol_factor * math.exp(scale / 2.0),
        budget=2_000_000,
    )
    return value, reference, "quadrature"


def spectral_lower_bound(lambda1, eps, scales, alpha=Fraction(1, 6), tol=1e-12):
    """hat h_L(i s) with s = sqrt(1/4 - lambda1) across an L-scan.

    Returns (values, two-point growth slopes, empirical C_eps): the slopes
    approach s >= 1/6 and C_eps = min_L hat h_L(is) e^(-(alpha+eps) L).

    hat h_L(is) grows like exp(sL - 2 sqrt(sL)) (Laplace endpoint analysis
    of the bump), so the two-point slope carries a -sqrt(s/L)-size deficit:
    the 1/6 threshold emerges for L in the hundreds, the constant C_eps
    absorbing the subexponential transient exactly as in the bound.
    """
    lambda1 = float(lambda1)
    if not (0.0 <= lambda1 <= float(Fraction(2, 9)) - float(eps) + 1e-15):
        raise DomainError("lambda1 must lie in [0, 2/9 - eps]")
    s = math.sqrt(0.25 - lambda1)
    values = {}
    for scale in scales:
        values[scale] = fourier_hl(1j * s, scale, tol=tol)
    slopes = []
    ordered = sorted(values)
    for a, b in zip(ordered, ordered[1:]):
        slopes.append((math.log(values[b]) - math.log(values[a])) / (b - a))
    c_eps = min(
        values[scale] * math.exp(-(float(alpha) + float(eps)) * scale)
        for scale in ordered
    )
    return values, slopes, c_eps


# ----------------------------------------------------------------------
# exact exponent bookkeeping


@dataclass(frozen=True)
class BoundConstants:
    """Named constants of the bound chain; exponents are exact rationals."""

    eps: Fraction
    kappa: Fraction
    m: int = 4
    alpha: Fraction = Fraction(1, 6)
    q_components: int = 77
    l_factor: int = 6
    assumed_trace_exponent: Fraction = None  # defaults to 1 + 5 eps

    def __post_init__(self):
        if self.eps <= 0 or not (0 < self.kappa < 1):
            raise DomainError("need eps > 0 and kappa in (0, 1)")
        if self.assumed_trace_exponent is None:
            object.__setattr__(self, "assumed_trace_exponent", 1 + 5 * self.eps)


def pipeline(constants: BoundConstants):
    """Reproduce the bound chain in exact exponent arithmetic.

    Steps: (i) the assumed trace-average bound g^(1+5eps); (ii) division by
    the Markov threshold C_eps kappa^m g^(1+6eps); (iii) the additive
    tangle-probability terms kappa^2 + g^(3 kappa/2 - 1) and the small-
    lambda1 term; (iv) the limsup-in-g structure O(kappa^2).
    """
    eps = Fraction(constants.eps)
    kappa = Fraction(constants.kappa)
    markov_exponent = 1 + 6 * eps
    main_exponent = constants.assumed_trace_exponent - markov_exponent
    if constants.assumed_trace_exponent != 1 + 5 * eps:
        # custom assumed input: still exact bookkeeping, flag it
        consistent = False
    else:
        consistent = main_exponent == -eps
    tangle_power = Fraction(3, 2) * kappa - 1
    spectral_identity = constants.alpha ** 2 + Fraction(2, 9) == Fraction(1, 4)
    # (1/4 + r^2)^m at r = i sqrt(1/4 - lambda) is lambda^m, symbolically:
    # 1/4 - (1/4 - lambda) = lambda
    lam = Fraction(1, 97)  # arbitrary probe rational
    markov_factor_identity = (
        Fraction(1, 4) - (Fraction(1, 4) - lam)
    ) ** constants.m == lam ** constants.m
    report = {
        "assumed_trace_exponent": constants.assumed_trace_exponent,
        "markov_divisor_exponent": markov_exponent,
        "main_term_exponent": main_exponent,
        "main_term_vanishes": main_exponent < 0,
        "exponent_arithmetic_consistent": consistent,
        "tangle_probability_terms": {
            "kappa_squared": kappa ** 2,
            "g_power": tangle_power,
            "g_power_vanishes": tangle_power < 0,
            "kappa_below_two_thirds": kappa < Fraction(2, 3),
        },
        "markov_factor_is_lambda_power": markov_factor_identity,
        "alpha_identity": spectral_identity,
        "limsup_structure": "O(kappa^2)",
        "limsup_kappa_exponent": 2,
        "length_scale": f"{constants.l_factor} log g",
        "q_components": constants.q_components,
        "m": constants.m,
        "scope": "exponent bookkeeping over assumed trace-average records; "
                 "no moduli-space expectation is evaluated here",
    }
    if not spectral_identity:
        raise DomainError("alpha^2 + 2/9 must equal 1/4")
    return report
