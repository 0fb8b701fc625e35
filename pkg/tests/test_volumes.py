import json
import math
import os
import random
from fractions import Fraction

import mpmath as mp
import pytest

from wpkit import psi_kappa
from wpkit.errors import DomainError, ResourceCapError
from wpkit.volumes import (
    Signature,
    VolumeCache,
    coefficient_ratio,
    coefficient_ratio_exact,
    dilaton_equation_check,
    partition_sum_bound,
    string_equation_check,
    volume_ratio,
)

PINNED = {
    (0, 3): {(): Fraction(1)},
    (1, 1): {(): Fraction(1, 6), (1,): Fraction(1, 24)},  # (x^2 + 4 pi^2)/24
    (0, 4): {(): Fraction(2), (1,): Fraction(1, 2)},  # 2 pi^2 + sum x^2 / 2
    (2, 0): {(): Fraction(43, 2160)},
}

PUBLISHED = {
    # Mirzakhani-Zograf style table anchors
    (1, 2): {(): Fraction(1, 4), (1,): Fraction(1, 12),
             (2,): Fraction(1, 192), (1, 1): Fraction(1, 96)},
    (2, 1): {(): Fraction(29, 192), (1,): Fraction(169, 2880),
             (2,): Fraction(139, 23040), (3,): Fraction(29, 138240),
             (4,): Fraction(1, 442368)},
    (3, 0): {(): Fraction(176557, 1209600)},
    (3, 1): {(): Fraction(9292841, 4082400)},
    (0, 5): {(): Fraction(10), (1,): Fraction(3), (2,): Fraction(1, 8),
             (1, 1): Fraction(1, 2)},
    (0, 6): {(): Fraction(244, 3)},
}


def test_pinned_values(cache):
    for sig, coeffs in PINNED.items():
        assert cache.compute(sig).coeffs == coeffs


def test_published_tables(cache):
    for sig, coeffs in PUBLISHED.items():
        got = cache.compute(sig).coeffs
        for mu, q in coeffs.items():
            assert got[mu] == q, (sig, mu)


def test_invalid_signatures():
    for bad in ((0, 0), (0, 2), (1, 0), (-1, 4)):
        with pytest.raises(DomainError):
            Signature(*bad)


def test_dimension_cap():
    small = VolumeCache(dimension_cap=3)
    with pytest.raises(ResourceCapError):
        small.compute((2, 2))


def test_oracle_equivalence_small(cache):
    """Exact agreement of the two independent algorithms on low dimensions
    (the full <= 8 sweep is the acceptance criterion)."""
    for sig in ((0, 5), (1, 2), (2, 1), (2, 0), (1, 4)):
        assert cache.compute(sig).coeffs == psi_kappa.volume_polynomial(sig).coeffs


def test_dvv_known_values():
    assert psi_kappa.tau(0, (0, 0, 0)) == 1
    assert psi_kappa.tau(1, (1,)) == Fraction(1, 24)
    assert psi_kappa.tau(2, (4,)) == Fraction(1, 1152)
    assert psi_kappa.tau(2, (2, 3)) == Fraction(29, 5760)
    assert psi_kappa.tau(2, (2, 2, 2)) == Fraction(7, 240)
    # genus-0 closed form (n-3)! / prod d_i!
    assert psi_kappa.tau(0, (0, 0, 0, 0, 2)) == Fraction(math.factorial(2), 2)
    assert psi_kappa.kappa_tau(2, 3, ()) == Fraction(43, 2880)


def test_evaluate_examples(cache):
    v03 = cache.compute((0, 3))
    assert float(v03.evaluate((0.3, 5.0, 2.0))) == 1.0
    v11 = cache.compute((1, 1))
    assert abs(float(v11.evaluate((0.0,))) - math.pi ** 2 / 6.0) < 1e-12
    v04 = cache.compute((0, 4))
    assert abs(float(v04.evaluate((2 * math.pi, 0, 0, 0))) - 4 * math.pi ** 2) < 1e-10


def test_evaluate_arity_and_domain(cache):
    v11 = cache.compute((1, 1))
    with pytest.raises(DomainError):
        v11.evaluate((1.0, 2.0))
    with pytest.raises(DomainError):
        v11.evaluate((-1.0,))


def test_evaluate_symmetry(cache):
    rng = random.Random(11)
    poly = cache.compute((1, 3))
    x = [rng.uniform(0.1, 4.0) for _ in range(3)]
    base = poly.evaluate(x)
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        assert abs(poly.evaluate([x[i] for i in perm]) - base) < 1e-25 * abs(base)


def test_evaluate_pi_rational(cache):
    v04 = cache.compute((0, 4))
    q, p = v04.evaluate_pi_rational((2, 0, 0, 0))  # x_1 = 2 pi
    assert (q, p) == (Fraction(4), 2)
    # cross-check against the float path
    assert abs(float(q) * math.pi ** p - float(v04.evaluate((2 * math.pi, 0, 0, 0)))) < 1e-10


def test_coefficient_ratio(cache):
    assert coefficient_ratio((1, 1), (0,)) == 1.0
    got = coefficient_ratio((1, 1), (1,))
    assert abs(got - 1.0 / (4 * math.pi ** 2)) < 1e-15
    q, p = coefficient_ratio_exact((1, 1), (1,))
    assert (q, p) == (Fraction(1, 4), -2)
    rng = random.Random(5)
    for _ in range(20):
        g, n = rng.choice([(1, 2), (2, 1), (0, 5), (1, 3)])
        sig = Signature(g, n)
        alpha = [rng.randint(0, 2) for _ in range(n)]
        if sum(alpha) > sig.dim:
            continue
        assert coefficient_ratio(sig, alpha) <= 1.0 + 1e-15


PI2_LOWER = Fraction(9869604401, 1000000000)  # < pi^2


def test_coefficient_monotonicity_exact(cache):
    """0 <= c(alpha) <= c(0) for every computed coefficient, exactly.

    c(alpha) = q_alpha pi^(2(d-|alpha|)) and c(0) = q_0 pi^(2d), so the
    inequality reads q_alpha <= q_0 pi^(2|alpha|); it is verified through
    the exact rational lower bound PI2_LOWER < pi^2."""
    for (g, n), coeffs in list(cache._stack.items()):
        q0 = coeffs.get((), Fraction(0))
        assert q0 > 0, (g, n)
        for mu, q in coeffs.items():
            assert q > 0, ((g, n), mu)
            assert q <= q0 * PI2_LOWER ** sum(mu), ((g, n), mu)


def test_volume_ratio(cache):
    assert volume_ratio((1, 2), (1, 2)) == 1.0
    assert abs(volume_ratio((1, 1), (0, 3)) - math.pi ** 2 / 6) < 1e-12
    # scan boundedness of V_{g-1,3} / V_{g,1}
    vals = [volume_ratio((g - 1, 3), (g, 1)) for g in range(3, 9)]
    assert max(vals) < 10 * min(vals)


def test_partition_sum_bound(cache):
    lhs, c, d = partition_sum_bound(3, 0, 1, (0,), cache=cache)
    assert c == 1.0 and abs(lhs - cache.constant_float(3, 0)) < 1e-12
    # q = 2, (n1, n2) = (1, 1) at g = 3: brute force over admissible genera
    lhs, c, d = partition_sum_bound(3, 0, 2, (1, 1), cache=cache, g_scan=[3, 4, 5])
    expected = 0.0
    for g1 in range(0, 4):
        g2_chi = (2 * 3 - 2) - (2 * g1 - 2 + 1)
        if (g2_chi + 1) % 2:
            continue
        g2 = (g2_chi + 1) // 2
        if 2 * g1 - 1 > 0 and 2 * g2 - 1 > 0 and g2 >= 0:
            expected += cache.constant_float(g1, 1) * cache.constant_float(g2, 1)
    assert abs(lhs - expected) < 1e-9 * expected
    assert d > 0
    # ratio lhs / V_{g,n} decreasing in g at fixed q = 2
    ratios = []
    for g in (3, 4, 5, 6):
        l, _, _ = partition_sum_bound(g, 0, 2, (1, 1), cache=cache)
        ratios.append(l / cache.constant_float(g, 0))
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_string_dilaton_identities(cache):
    for g, n in ((0, 3), (0, 4), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (5, 3)):
        assert string_equation_check(g, n, cache)
        assert dilaton_equation_check(g, n, cache)


def test_cache_roundtrip_and_determinism(tmp_path, cache):
    small = VolumeCache(dimension_cap=6)
    for sig in ((0, 3), (1, 1), (0, 4), (1, 2), (2, 0), (2, 1)):
        small.compute(sig)
    p1 = str(tmp_path / "a.json")
    p2 = str(tmp_path / "b.json")
    small.dump(p1)
    small.dump(p2)
    with open(p1, "rb") as f1, open(p2, "rb") as f2:
        assert f1.read() == f2.read()
    reloaded = VolumeCache(dimension_cap=6, path=p1)
    assert reloaded._stack == small._stack
    p3 = str(tmp_path / "c.json")
    reloaded.dump(p3)
    with open(p1, "rb") as f1, open(p3, "rb") as f3:
        assert f1.read() == f3.read()


def test_cache_checksum_rejects_corruption(tmp_path):
    small = VolumeCache(dimension_cap=4)
    small.compute((1, 1))
    path = str(tmp_path / "cache.json")
    small.dump(path)
    with open(path) as fh:
        doc = json.load(fh)
    doc["entries"]["1,1"]["1"] = "1/23"
    with open(path, "w") as fh:
        json.dump(doc, fh)
    with pytest.raises(DomainError):
        VolumeCache(dimension_cap=4, path=path)


def test_csv_export(tmp_path, cache):
    path = str(tmp_path / "coeffs.csv")
    cache.export_csv(path, signatures=[(1, 1), (0, 4)])
    lines = open(path).read().strip().splitlines()
    assert lines[0] == "g,n,alpha,numerator,denominator,pi_power"
    assert "1,1,1,1,24,0" in lines  # x^2 coefficient of V_{1,1}
    assert "1,1,0,1,6,2" in lines  # constant pi^2 / 6


def test_high_precision_evaluate(cache):
    poly = cache.compute((1, 1))
    val = poly.evaluate((1.0,), dps=50)
    with mp.workdps(60):
        expected = (mp.mpf(1) + 4 * mp.pi ** 2) / 24
        assert abs(val - expected) < mp.mpf(10) ** (-45)
