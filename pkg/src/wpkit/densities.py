"""Length-density assembly for loops filling a pair of pants or crossing a
short curve on a one-holed torus, plus the polynomial-vs-remainder
decomposition check used on every ingredient.

The pants density at length l combines the alternating series over added
cylinders with a level-set integral:

    A(l) = [ sum_j (-1)^j I(kappa)^j / j! * V_{g-2-j, 2j+3} / V_g ]
           * int_{h = l} f1(l1) f1(l2) f1(l3) dl1 dl2 dl3 / dl

where h(l1, l2, l3) is the word's geodesic length on the pants with those
boundary lengths and f1(x) = 2 sinh(x/2).  The level set is parametrised by
(l1, l2) with l3 solved by a monotone root find; the Jacobian dl3/dl comes
from finite differences on h.  Dirac (coinciding-boundary) and
cylinder-glued (indicator-restricted) corrections are evaluated as separate
lower-dimensional integrals, never as smoothed kernels.

The decomposition checker normalises f by sinh(l/2) (or 4 sinh^2(l/2) for
e^l-scale inputs), fits a polynomial on the upper half of the window and
reports the weighted sup statistic sup |f/norm - p| e^(l/2) (l+1)^(-c)
together with the decay slope of the remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .hypgeo import geodesic_length, j_kappa_closed, pants_from_lengths
from .inclexcl import i_small
from .quadrature import find_root, quad
from .volumes import default_cache


def f1(x):
    """f1(x) = 2 sinh(x/2)."""
    if x < 0:
        raise DomainError("length must be nonnegative")
    return 2.0 * math.sinh(x / 2.0)


# ----------------------------------------------------------------------
# polynomial + remainder decomposition


@dataclass
class FRDecomposition:
    sigma: float
    degree: int
    c: float
    poly: np.ndarray  # coefficients, low degree first
    residual_stat: float
    residual_slope: float  # fitted decay of log|remainder| vs l; None if flat zero
    window: tuple
    passes: bool


def _normalizer(ell, sigma):
    if sigma == 0.5:
        return math.sinh(ell / 2.0)
    if sigma == 1.0:
        return 4.0 * math.sinh(ell / 2.0) ** 2
    raise DomainError("sigma must be 1/2 or 1")


def fr_decompose(ells, values, sigma=0.5, max_degree=2, c=2.0, threshold=None):
    """Fit the normalised samples to a polynomial and measure the remainder.

    The polynomial is fitted on the upper half of the window (where the
    e^(-l/2) remainder is negligible); the statistic and the decay slope
    are measured on the full window.
    """
    ells = np.asarray(ells, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(ells) != len(values) or len(ells) < 2 * (max_degree + 1):
        raise DomainError("window too small for the requested degree")
    if ells.max() < 4.0 * max(max_degree, 1):
        raise DomainError("window too short: need max(l) >= 4 * degree")
    norm = np.array([_normalizer(l, sigma) for l in ells])
    g = values / norm
    upper = ells >= 0.5 * (ells.min() + ells.max())
    poly = np.polynomial.polynomial.polyfit(ells[upper], g[upper], max_degree)
    fit = np.polynomial.polynomial.polyval(ells, poly)
    rem = g - fit
    stat = float(np.max(np.abs(rem) * np.exp(ells / 2.0) * (ells + 1.0) ** (-c)))
    live = np.abs(rem) > 1e-14 * (np.abs(g) + 1.0)
    if live.sum() >= 4:
        slope = float(np.polyfit(ells[live], np.log(np.abs(rem[live])), 1)[0])
    else:
        slope = None
    return FRDecomposition(
        sigma=sigma,
        degree=max_degree,
        c=c,
        poly=poly,
        residual_stat=stat,
        residual_slope=slope,
        window=(float(ells.min()), float(ells.max())),
        passes=(threshold is None or stat <= threshold),
    )


# ----------------------------------------------------------------------
# level-set integration over pants boundary lengths


class PantsLengthFunction:
    """h(l1, l2, l3): geodesic length of a fixed filling word as a function
    of the pants boundary lengths.  Strictly increasing in each argument for
    filling words; monotonicity in l3 is asserted where the root find needs
    it."""

    def __init__(self, word=(1, -2)):
        self.word = tuple(word)

    def __call__(self, l1, l2, l3):
        model = pants_from_lengths(max(l1, 1e-12), max(l2, 1e-12), max(l3, 1e-12))
        return geodesic_length(model, self.word)

    def solve_l3(self, l1, l2, ell, hi_start=8.0):
        """l3 with h(l1, l2, l3) = ell, or None when h(l1, l2, 0+) >= ell."""
        lo = 1e-9
        base = self(l1, l2, lo)
        if base >= ell:
            return None
        hi = hi_start
        while self(l1, l2, hi) < ell:
            hi *= 2.0
            if hi > 1e6:
                raise NumericalError("level-set root escaped to infinity")
        return find_root(lambda t: self(l1, l2, t) - ell, lo, hi, tol=1e-12)

    def dh_dl3(self, l1, l2, l3, step=1e-6):
        h = step * max(1.0, l3)
        return (self(l1, l2, l3 + h) - self(l1, l2, max(l3 - h, 1e-12))) / (
            h + min(h, l3 - 1e-12)
        )


def _max_l1(hfun, ell):
    """Largest l1 with h(l1, ~0, ~0) < ell."""
    eps = 1e-9
    if hfun(eps, eps, eps) >= ell:
        return None
    hi = 4.0
    while hfun(hi, eps, eps) < ell:
        hi *= 2.0
        if hi > 1e6:
            raise NumericalError("level set unbounded in l1")
    return find_root(lambda t: hfun(t, eps, eps) - ell, eps, hi, tol=1e-10)


def level_set_integral(hfun, ell, weight=None, domain_cut=None, tol=1e-6):
    """int over {h = ell} of f1(l1) f1(l2) f1(l3) * weight / |dh/dl3|,
    parametrised by (l1, l2).  ``domain_cut`` optionally caps (l1, l2)
    (used by the cylinder-glued corrections)."""
    weight = weight or (lambda l1, l2, l3: 1.0)
    top1 = _max_l1(hfun, ell)
    if top1 is None:
        return 0.0
    if domain_cut is not None and domain_cut[0] is not None:
        top1 = min(top1, domain_cut[0])
    # the integral grows like l e^(l/2); tol is relative to that scale
    scale = max(1.0, ell * f1(ell))

    def outer(l1):
        if l1 <= 0:
            return 0.0
        eps = 1e-9
        if hfun(l1, eps, eps) >= ell:
            return 0.0
        hi = 4.0
        while hfun(l1, hi, eps) < ell:
            hi *= 2.0
        top2 = find_root(lambda t: hfun(l1, t, eps) - ell, eps, hi, tol=1e-10)
        if domain_cut is not None and domain_cut[1] is not None:
            top2 = min(top2, domain_cut[1])

        def inner(l2):
            if l2 <= 0:
                return 0.0
            l3 = hfun.solve_l3(l1, l2, ell)
            if l3 is None or l3 <= 0:
                return 0.0
            w = weight(l1, l2, l3)
            if w == 0.0:
                return 0.0
            d = hfun.dh_dl3(l1, l2, l3)
            if d <= 0:
                raise NumericalError("h not increasing in l3 on the level set")
            return f1(l1) * f1(l2) * f1(l3) * w / d

        return quad(inner, 0.0, top2, tol=tol * scale / max(top1, 1.0), budget=400_000)

    return quad(outer, 0.0, top1, tol=tol * scale, budget=400_000)


def dirac_correction(hfun, ell, equal_pair=(1, 2), tol=1e-6):
    """int over {h = ell, l_j = l_k} of f1(l_i) * l_j / |dh/dl_i| dt, the
    Dirac-type correction for a coinciding boundary pair."""
    j, k = equal_pair
    i = ({0, 1, 2} - {j - 1, k - 1}).pop()  # 0-based free slot

    def assemble(t, li):
        vals = [0.0, 0.0, 0.0]
        vals[j - 1] = t
        vals[k - 1] = t
        vals[i] = li
        return vals

    def h_of(t, li):
        return hfun(*assemble(t, li))

    eps = 1e-9
    if h_of(eps, eps) >= ell:
        return 0.0
    hi = 4.0
    while h_of(hi, eps) < ell:
        hi *= 2.0
    t_max = find_root(lambda t: h_of(t, eps) - ell, eps, hi, tol=1e-10)

    def integrand(t):
        if t <= 0:
            return 0.0
        if h_of(t, eps) >= ell:
            return 0.0
        hi_i = 4.0
        while h_of(t, hi_i) < ell:
            hi_i *= 2.0
        li = find_root(lambda u: h_of(t, u) - ell, eps, hi_i, tol=1e-12)
        step = 1e-6 * max(1.0, li)
        d = (h_of(t, li + step) - h_of(t, max(li - step, eps))) / (
            step + min(step, li - eps)
        )
        if d <= 0:
            raise NumericalError("h not increasing in the free boundary")
        return f1(li) * t / d

    scale = max(1.0, ell * f1(ell))
    return quad(integrand, 0.0, t_max, tol=tol * scale, budget=400_000)


# ----------------------------------------------------------------------
# density assemblies


@dataclass
class DensityAssembly:
    base_tag: str
    g: int
    kappa: float
    grid: tuple
    values: tuple  # series factor x level-set integral per grid point
    series_factor: float
    series_terms: tuple
    truncation_certificate: float  # |last kept term| / |partial sum|
    corrections: dict  # label -> per-grid-point values


def _alternating_series(g, kappa, j_max, piece, cache):
    """sum_j (-1)^j I(kappa)^j/j! V_piece(j)/V_g, stopping at j_max, the
    topological end, or the edge of the volume table (whichever first; the
    certificate bounds the next term by |last| * I/(j+1), volume ratios
    being decreasing in j)."""
    from .errors import ResourceCapError

    ik = i_small(kappa)
    vg = cache.constant_float(g, 0)
    terms = []
    j = 0
    while j <= j_max:
        sig = piece(j)
        if sig is None:
            break
        try:
            vol = cache.constant_float(*sig)
        except (ResourceCapError, DomainError):
            break
        terms.append((-1) ** j * ik ** j / math.factorial(j) * vol / vg)
        j += 1
    if not terms:
        raise DomainError("no series term computable at this signature")
    total = sum(terms)
    cert = abs(terms[-1]) * ik / len(terms) / max(abs(total), 1e-300)
    return total, tuple(terms), cert


def _pants_series_factor(g, kappa, j_max, cache):
    def piece(j):
        return (g - 2 - j, 2 * j + 3) if j <= g - 2 else None

    return _alternating_series(g, kappa, j_max, piece, cache)


def assemble_density_pants(word, g, kappa, ell_grid, j_max=12, cache=None,
                           tol=1e-6, with_corrections=True):
    """Density of lengths of geodesics of the given pants-filling word type,
    at the leading volume order, with correction terms recorded separately."""
    cache = cache or default_cache()
    if g < 2:
        raise DomainError("need g >= 2")
    hfun = PantsLengthFunction(word)
    factor, terms, cert = _pants_series_factor(g, kappa, j_max, cache)
    values = []
    diracs = {(1, 2): [], (1, 3): [], (2, 3): []}
    glued = {1: [], 2: []}
    for ell in ell_grid:
        base = level_set_integral(hfun, ell, tol=tol)
        values.append(factor * base)
        if with_corrections:
            for pair in diracs:
                diracs[pair].append(dirac_correction(hfun, ell, pair, tol=tol))
            for count in glued:
                cut = [kappa] * count + [None] * (2 - count)
                glued[count].append(
                    level_set_integral(hfun, ell, domain_cut=tuple(cut), tol=tol)
                )
    corrections = {}
    if with_corrections:
        for pair, vals in diracs.items():
            corrections[f"dirac_{pair[0]}{pair[1]}"] = tuple(vals)
        for count, vals in glued.items():
            corrections[f"cylinder_glued_{count}"] = tuple(vals)
    return DensityAssembly(
        base_tag=f"pants:{word}",
        g=g,
        kappa=kappa,
        grid=tuple(ell_grid),
        values=tuple(values),
        series_factor=factor,
        series_terms=terms,
        truncation_certificate=cert,
        corrections=corrections,
    )


def torus_once_intersecting_density(g, kappa, ell_grid, j_max=12, cache=None):
    """Density for the pair (simple loop, once-intersecting short loop) on an
    embedded one-holed torus: series factor times J_kappa(l)."""
    cache = cache or default_cache()
    if g < 2:
        raise DomainError("need g >= 2")

    def piece(j):
        return (g - 1 - j, 1 + 2 * j) if j <= g - 1 else None

    factor, terms, cert = _alternating_series(g, kappa, j_max, piece, cache)
    values = tuple(factor * j_kappa_closed(ell, kappa) for ell in ell_grid)
    return DensityAssembly(
        base_tag="torus:once-intersecting",
        g=g,
        kappa=kappa,
        grid=tuple(ell_grid),
        values=values,
        series_factor=factor,
        series_terms=tuple(terms),
        truncation_certificate=cert,
        corrections={},
    )
