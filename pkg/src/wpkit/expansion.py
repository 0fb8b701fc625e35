"""Sinh/cosh asymptotic expansion of x_1...x_n V_{g,n}(x) / V_{g,n}.

The order-zero term is exact: 2^n prod_i sinh(x_i/2).  Residuals against it
are computed at 50 significant digits and their decay in g is fitted
against the predicted (g+1)^-(N+1) shape.  The next order is *empirically*
fitted per genus in the parity-constrained basis

    x cosh(x/2),  sinh(x/2),  x^2 sinh(x/2),  x        (n = 1)

which is exactly the shape the order-one layer can take: even polynomials
of degree <= 2 against sinh, odd against cosh and against nothing.  The
fitted coefficients vary with g; regressing them on the measured
coefficient ratios c_{g,1}(alpha)/V_{g,1} checks that they are (close to)
g-independent linear combinations of those ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, NumericalError
from .volumes import Signature, default_cache

WORKING_DPS = 50


def leading_term(n, x):
    """2^n prod_i sinh(x_i / 2), the exact order-zero expansion."""
    x = tuple(x)
    if len(x) != n:
        raise DomainError("length vector arity mismatch")
    out = float(2 ** n)
    for v in x:
        out *= math.sinh(v / 2.0)
    return out


@dataclass(frozen=True)
class SinhCoshExpansion:
    """Expansion terms: map (V_plus, V_minus) -> polynomial {exponents: coeff}."""

    n: int
    order: int
    terms: dict

    def evaluate(self, x):
        x = tuple(x)
        total = 0.0
        for (vplus, vminus), poly in self.terms.items():
            factor = 1.0
            for i in vplus:
                factor *= math.cosh(x[i] / 2.0)
            for i in vminus:
                factor *= math.sinh(x[i] / 2.0)
            pval = 0.0
            for expo, coeff in poly.items():
                term = coeff
                for xi, e in zip(x, expo):
                    term *= xi ** e
                pval += term
            total += factor * pval
        return total

    def parity_ok(self, samples=None):
        """Item-2 parity: even in x_i for i in V_minus, odd otherwise."""
        rng = np.random.default_rng(7)
        pts = samples if samples is not None else rng.uniform(0.3, 3.0, size=(8, self.n))
        for (vplus, vminus), poly in self.terms.items():
            for pt in pts:
                for i in range(self.n):
                    flipped = list(pt)
                    flipped[i] = -flipped[i]
                    val = _poly_eval(poly, pt)
                    fval = _poly_eval(poly, flipped)
                    if i in vminus:
                        if abs(val - fval) > 1e-9 * (abs(val) + 1e-30):
                            return False
                    else:
                        if abs(val + fval) > 1e-9 * (abs(val) + 1e-30):
                            return False
        return True

    def degree_ok(self):
        """Item-3 degree bound: total degree <= 2 * order in V+ u V- slots."""
        for (vplus, vminus), poly in self.terms.items():
            active = set(vplus) | set(vminus)
            for expo in poly:
                if sum(e for i, e in enumerate(expo) if i in active) > 2 * self.order:
                    return False
        return True


def _poly_eval(poly, x):
    total = 0.0
    for expo, coeff in poly.items():
        term = coeff
        for xi, e in zip(x, expo):
            term *= xi ** e
        total += term
    return total


def leading_expansion(n):
    """F^(0) as a SinhCoshExpansion: the single term (V+ = {}, V- = all)."""
    return SinhCoshExpansion(
        n, 0, {((), tuple(range(n))): {(0,) * n: float(2 ** n)}}
    )


def residual(sig, x, order=0, cache=None, signed=False):
    """x_1...x_n V_{g,n}(x)/V_{g,n} - F^(order)(x), at 50-digit precision.

    Only order 0 has an exact expansion; the absolute value is returned
    unless ``signed``.
    """
    if order != 0:
        raise DomainError("only the exact order-0 expansion is implemented")
    cache = cache or default_cache()
    if not isinstance(sig, Signature):
        sig = Signature(*sig)
    x = tuple(float(v) for v in x)
    poly = cache.compute(sig)
    old = mp.mp.dps
    mp.mp.dps = WORKING_DPS
    try:
        vx = poly.evaluate(x)
        v0 = poly.evaluate((0.0,) * sig.n)
        lead = mp.mpf(2) ** sig.n
        prefactor = mp.mpf(1)
        for v in x:
            prefactor *= v
            lead *= mp.sinh(mp.mpf(v) / 2)
        value = prefactor * vx / v0 - lead
        return float(value) if signed else abs(float(value))
    finally:
        mp.mp.dps = old


@dataclass
class ResidualScan:
    n: int
    x_grid: tuple
    g_range: tuple
    order: int
    residuals: dict  # (g, x) -> float, signed
    fitted_exponent: float  # None for the exact-zero case
    fitted_constant: float
    exact_zero: bool


def residual_scan(n, x_grid, g_range, cache=None):
    cache = cache or default_cache()
    res = {}
    for g in g_range:
        for x in x_grid:
            xv = (x,) * n if np.isscalar(x) else tuple(x)
            res[(g, x)] = residual((g, n), xv, cache=cache, signed=True)
    return res


def verify_error_shape(n, x_grid, g_range, order=0, cache=None):
    """Least-squares fit of log residual against log(g+1).

    Returns a ResidualScan whose fitted exponent should sit near -(N+1) and
    whose constant is max residual * (g+1)^(N+1) / ((|x|_1 + 1)^(3N+1)
    exp(sum x_i / 2)) over the scan.
    """
    g_range = tuple(g_range)
    x_grid = tuple(x_grid)
    if len(g_range) < 4:
        raise DomainError("need at least 4 genus values for the fit")
    res = residual_scan(n, x_grid, g_range, cache=cache)
    mags = {g: np.mean([abs(res[(g, x)]) for x in x_grid]) for g in g_range}
    if max(mags.values()) < 1e-40:
        return ResidualScan(n, x_grid, g_range, order, res, None, 0.0, True)
    xs = np.log([g + 1.0 for g in g_range])
    ys = np.log([max(mags[g], 1e-300) for g in g_range])
    slope, _ = np.polyfit(xs, ys, 1)
    const = 0.0
    for (g, x), r in res.items():
        xv = (x,) * n if np.isscalar(x) else tuple(x)
        norm1 = sum(abs(v) for v in xv)
        bound_shape = (norm1 + 1.0) ** (3 * order + 1) * math.exp(sum(xv) / 2.0)
        const = max(const, abs(r) * (g + 1.0) ** (order + 1) / bound_shape)
    return ResidualScan(n, x_grid, g_range, order, res, float(slope), const, False)


@dataclass
class NextOrderFit:
    basis_labels: tuple
    coefficients: dict  # g -> np.ndarray of per-genus fitted coefficients
    expansion: SinhCoshExpansion  # from the coefficients at the largest g
    post_fit_exponent: float
    condition_number: float
    ratio_regression_r2: float


_BASIS_LABELS = ("x*cosh(x/2)", "sinh(x/2)", "x^2*sinh(x/2)", "x")


def _basis_matrix(x_grid):
    rows = []
    for x in x_grid:
        rows.append(
            [
                x * math.cosh(x / 2.0),
                math.sinh(x / 2.0),
                x * x * math.sinh(x / 2.0),
                x,
            ]
        )
    return np.array(rows)


def fit_next_order(n, x_grid, g_range, cache=None, cond_cap=1e12):
    """Per-genus least-squares fit of g * residual in the order-one basis.

    Only n = 1 is supported: the scan of the acceptance suite; larger n
    would require the companion construction of the P^(N, V+-) family.
    """
    if n != 1:
        raise DomainError("fit_next_order supports n = 1 (acceptance scan)")
    cache = cache or default_cache()
    g_range = tuple(g_range)
    x_grid = tuple(x_grid)
    if len(x_grid) < 6:
        raise DomainError("need at least 6 grid points for the 4-basis fit")
    design = _basis_matrix(x_grid)
    cond = float(np.linalg.cond(design))
    if cond > cond_cap:
        raise NumericalError(f"basis ill-conditioned on this grid (cond = {cond:.3e})",
                             achieved=cond)
    res = residual_scan(1, x_grid, g_range, cache=cache)
    coeffs = {}
    post = {}
    for g in g_range:
        target = np.array([g * res[(g, x)] for x in x_grid])
        beta, *_ = np.linalg.lstsq(design, target, rcond=None)
        coeffs[g] = beta
        r2 = target - design @ beta
        post[g] = float(np.sqrt(np.mean((r2 / g) ** 2)))
    xs = np.log([g + 1.0 for g in g_range])
    ys = np.log([max(post[g], 1e-300) for g in g_range])
    slope, _ = np.polyfit(xs, ys, 1)

    g_top = max(g_range)
    beta = coeffs[g_top]
    expansion = SinhCoshExpansion(
        1,
        1,
        {
            ((0,), ()): {(1,): float(beta[0])},
            ((), (0,)): {(0,): float(beta[1]) + 2.0, (2,): float(beta[2]) / g_top},
            ((), ()): {(1,): float(beta[3])},
        },
    )
    r2 = _ratio_regression(coeffs, g_range, cache)
    return NextOrderFit(
        basis_labels=_BASIS_LABELS,
        coefficients=coeffs,
        expansion=expansion,
        post_fit_exponent=float(slope),
        condition_number=cond,
        ratio_regression_r2=r2,
    )


def _ratio_regression(coeffs, g_range, cache):
    """Regress each fitted coefficient on the measured coefficient ratios
    (c(1)/V, c(2)/V, c(3)/V), reporting the worst R^2."""
    feats = []
    for g in g_range:
        poly = cache.compute((g, 1))
        q0, p0 = poly.constant()
        row = []
        for a in (1, 2, 3):
            qa, pa = poly.coefficient((a,))
            row.append(float(qa / q0) * math.pi ** (pa - p0))
        feats.append([1.0] + row)
    feats = np.array(feats)
    worst = 1.0
    for k in range(4):
        target = np.array([coeffs[g][k] for g in g_range])
        beta, *_ = np.linalg.lstsq(feats, target, rcond=None)
        pred = feats @ beta
        ss_res = float(np.sum((target - pred) ** 2))
        ss_tot = float(np.sum((target - np.mean(target)) ** 2))
        if ss_tot > 1e-30:
            worst = min(worst, 1.0 - ss_res / ss_tot)
    return worst
