import math

import numpy as np
import pytest

from wpkit.densities import (
    PantsLengthFunction,
    assemble_density_pants,
    dirac_correction,
    f1,
    fr_decompose,
    level_set_integral,
    torus_once_intersecting_density,
)
from wpkit.errors import DomainError
from wpkit.hypgeo import j_kappa_closed, j_kappa_limit

ELLS = np.linspace(4.0, 16.0, 25)


def test_f1():
    assert f1(0.0) == 0.0
    assert abs(f1(2.0) - 2 * math.sinh(1.0)) < 1e-14
    assert all(abs(f1(l) / math.sinh(l / 2) - 2.0) < 1e-14 for l in (0.5, 3.0, 9.0))
    with pytest.raises(DomainError):
        f1(-1.0)


def test_fr_decompose_f1():
    fr = fr_decompose(ELLS, [f1(l) for l in ELLS], sigma=0.5, max_degree=2)
    assert abs(fr.poly[0] - 2.0) < 1e-9
    assert all(abs(c) < 1e-9 for c in fr.poly[1:])
    assert fr.residual_stat < 1e-9


def test_fr_decompose_damped():
    kappa = 0.5
    vals = [f1(l) if l <= kappa else 0.0 for l in ELLS]
    fr = fr_decompose(ELLS, vals, sigma=0.5, max_degree=2)
    assert all(abs(c) < 1e-9 for c in fr.poly)  # p ~ 0


def test_fr_decompose_j_kappa():
    kappa = 0.5
    ells = np.linspace(6.0, 24.0, 30)
    fr = fr_decompose(ells, [j_kappa_closed(l, kappa) for l in ells],
                      sigma=1.0, max_degree=0)
    assert abs(fr.poly[0] - 4 * j_kappa_limit(kappa)) < 1e-5
    assert fr.residual_slope <= -0.5 + 0.1


def test_fr_decompose_window_validation():
    with pytest.raises(DomainError):
        fr_decompose((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), max_degree=2)
    short = np.linspace(0.5, 3.0, 12)
    with pytest.raises(DomainError):
        fr_decompose(short, [f1(l) for l in short], max_degree=2)


def _sample(fn, damp=None):
    out = []
    for l in ELLS:
        v = fn(l)
        if damp is not None and l > damp:
            v = 0.0
        out.append(v)
    return out


def test_fr_basis_battery():
    """l^k cosh(l/2), l^k sinh(l/2), l^k times 1, 1[0,kappa], 1[0,kappa log g]:
    undamped members have a nonzero polynomial part, indicator-damped ones
    fit p ~ 0 with remainder decaying at least like e^(-l/2)."""
    kappa = 0.5
    log_g_window = kappa * math.log(50.0)
    for k in (0, 1, 2):
        for base in (
            lambda l, k=k: l ** k * math.cosh(l / 2),
            lambda l, k=k: l ** k * math.sinh(l / 2),
            lambda l, k=k: float(l ** k),
        ):
            undamped = fr_decompose(ELLS, _sample(base), sigma=0.5, max_degree=3)
            assert undamped.residual_stat < 1e6
            for cutoff in (kappa, log_g_window):
                damped = fr_decompose(ELLS, _sample(base, damp=cutoff),
                                      sigma=0.5, max_degree=3)
                assert all(abs(c) < 1e-6 for c in damped.poly)
        # the cosh/sinh members must keep a genuinely nonzero polynomial
        fr = fr_decompose(ELLS, _sample(lambda l, k=k: l ** k * math.sinh(l / 2)),
                          sigma=0.5, max_degree=3)
        assert max(abs(c) for c in fr.poly) > 0.5


def test_norm_growth_with_log_window():
    """The 1[0, kappa log g]-damped statistic grows no faster than
    g^(kappa/2) (up to the polynomial margin)."""
    kappa = 0.5
    stats = {}
    for g in (20.0, 400.0):
        window = kappa * math.log(g)
        grid = np.linspace(0.2, 16.0, 160)
        vals = [f1(l) if l <= window else 0.0 for l in grid]
        fr = fr_decompose(grid, vals, sigma=0.5, max_degree=0, c=0.0)
        stats[g] = fr.residual_stat
    growth = stats[400.0] / stats[20.0]
    allowed = (400.0 / 20.0) ** (kappa / 2) * 1.5
    assert growth <= allowed


def test_level_set_zero_below_minimum(cache):
    h = PantsLengthFunction((1, -2))
    min_len = 2 * math.acosh(3.0)
    assert h(1e-9, 1e-9, 1e-9) == pytest.approx(min_len, abs=1e-6)
    assert level_set_integral(h, min_len - 0.5) == 0.0
    assert dirac_correction(h, min_len - 0.5) == 0.0


def test_density_assembly(cache):
    grid = (4.0, 5.0, 6.0)
    asm = assemble_density_pants((1, -2), 8, 0.3, grid, cache=cache)
    assert all(v >= 0 for v in asm.values)
    assert asm.values[0] < asm.values[1] < asm.values[2]
    assert asm.truncation_certificate < 1e-8
    # alternating series with ratio < 1 beyond small j
    terms = asm.series_terms
    assert terms[0] > 0 > terms[1]
    assert all(abs(terms[i + 1] / terms[i]) < 1.0 for i in range(1, len(terms) - 1))
    # corrections recorded separately, nonnegative
    for label, vals in asm.corrections.items():
        assert len(vals) == len(grid)
        assert all(v >= 0 for v in vals), label


def test_density_fr_fit(cache):
    grid = tuple(np.linspace(4.0, 14.0, 12))
    asm = assemble_density_pants((1, -2), 8, 0.3, grid, cache=cache,
                                 with_corrections=False)
    fr = fr_decompose(grid, [l * v for l, v in zip(asm.grid, asm.values)],
                      sigma=0.5, max_degree=3)
    assert math.isfinite(fr.residual_stat)
    assert fr.residual_slope <= -0.5 + 0.1


def test_torus_density(cache):
    asm = torus_once_intersecting_density(8, 0.5, (6.0, 8.0, 10.0), cache=cache)
    # factorisation: output / J is ell-independent
    ratios = [v / j_kappa_closed(l, 0.5) for l, v in zip(asm.grid, asm.values)]
    assert abs(ratios[0] - ratios[1]) < 1e-12 * abs(ratios[0])
    assert abs(ratios[1] - ratios[2]) < 1e-12 * abs(ratios[1])
    assert asm.truncation_certificate < 1e-8
    # kappa small and ell moderate: empty twist window
    empty = torus_once_intersecting_density(8, 0.05, (2.0, 3.0), cache=cache)
    assert empty.values == (0.0, 0.0)


def test_density_validation(cache):
    with pytest.raises(DomainError):
        assemble_density_pants((1, -2), 1, 0.3, (5.0,), cache=cache)
