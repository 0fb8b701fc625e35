"""Independent volume oracle via psi/kappa intersection numbers.

Volume polynomials can be reassembled from intersection numbers on the
Deligne-Mumford compactification:

    V_{g,n}(x) = sum over (alpha, m), |alpha| + m = 3g-3+n, of
        (2 pi^2)^m / m! * prod_i x_i^(2 alpha_i) / (2^(alpha_i) alpha_i!)
        * < kappa_1^m  psi_1^(alpha_1) ... psi_n^(alpha_n) >_g

Two classical ingredients make this computable with exact rationals:

* kappa_1 powers reduce to pure psi (tau) brackets through the pushforward
  relations pi^* kappa_1 = kappa_1 - psi' and psi' . D_i = 0, which give

      <kappa_1^m X> = sum_k (-1)^k C(m-1, k) <kappa_1^(m-1-k) tau_{k+2} X>

  (equivalently, a sum over set partitions of the m kappa's where a block
  of size b inserts tau_{b+1} with weight (-1)^(b-1));
* pure tau brackets satisfy the Virasoro (DVV) recursion with the seeds
  <tau_0^3>_0 = 1 and <tau_1>_1 = 1/24, together with the string and
  dilaton equations.

This module shares no code or constants with the Mirzakhani-kernel
recursion in :mod:`wpkit.volumes`; agreement of the two is the volume
acceptance criterion.  The (1,1) doubling of the public convention is
applied here as well so the two sides compare like for like.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .errors import DomainError
from .volumes import Signature, VolumePolynomial, _cls


def _dfact(k):
    """(2k+1)!! as an exact integer for k >= -1."""
    if k < 0:
        return 1
    out = 1
    for i in range(1, 2 * k + 2, 2):
        out *= i
    return out


@lru_cache(maxsize=None)
def tau(g, ds):
    """<tau_{d_1} ... tau_{d_n}>_g for the sorted tuple ``ds``."""
    n = len(ds)
    if g < 0 or n < 0 or (g == 0 and n < 3) or (g == 1 and n < 1):
        return Fraction(0)
    if sum(ds) != 3 * g - 3 + n:
        return Fraction(0)
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and n == 1:
        return Fraction(1, 24) if ds == (1,) else Fraction(0)
    ds = tuple(sorted(ds))
    if ds and ds[0] == 0:
        # string equation
        rest = ds[1:]
        total = Fraction(0)
        for j in range(len(rest)):
            if rest[j] >= 1:
                lowered = rest[:j] + (rest[j] - 1,) + rest[j + 1:]
                total += tau(g, tuple(sorted(lowered)))
        return total
    if ds and ds[0] == 1:
        # dilaton equation
        rest = ds[1:]
        return Fraction(2 * g - 2 + len(rest)) * tau(g, rest)
    # DVV on the largest index
    d1 = ds[-1]
    rest = ds[:-1]
    lhs_factor = Fraction(_dfact(d1))
    total = Fraction(0)
    for j in range(len(rest)):
        dj = rest[j]
        joined = rest[:j] + rest[j + 1:] + (d1 + dj - 1,)
        total += Fraction(_dfact(d1 + dj - 1), _dfact(dj - 1)) * tau(g, tuple(sorted(joined)))
    for a in range(0, d1 - 1):
        b = d1 - 2 - a
        w = Fraction(_dfact(a) * _dfact(b), 2)
        total += w * tau(g - 1, tuple(sorted(rest + (a, b))))
        for g1 in range(0, g + 1):
            g2 = g - g1
            for sub, ways in _sub_multisets(rest):
                comp = _multiset_difference(rest, sub)
                total += (
                    w
                    * ways
                    * tau(g1, tuple(sorted(sub + (a,))))
                    * tau(g2, tuple(sorted(comp + (b,))))
                )
    return total / lhs_factor


@lru_cache(maxsize=None)
def _sub_multisets(ds):
    """Sub-multisets of a sorted tuple with the number of point subsets
    realising each, as ((sub, count), ...)."""
    if not ds:
        return (((), 1),)
    first = ds[0]
    mult = sum(1 for v in ds if v == first)
    rest = ds[mult:]
    out = []
    for tail, ways in _sub_multisets(rest):
        for k in range(mult + 1):
            out.append((tuple(sorted((first,) * k + tail)), ways * comb(mult, k)))
    return tuple(out)


def _multiset_difference(ds, sub):
    items = list(ds)
    for v in sub:
        items.remove(v)
    return tuple(items)


@lru_cache(maxsize=None)
def kappa_tau(g, m, ds):
    """<kappa_1^m  tau_{d_1} ... tau_{d_n}>_g, trading one kappa_1 for a
    descendant insertion at a time."""
    if m < 0:
        raise DomainError("negative kappa power")
    if m == 0:
        return tau(g, tuple(sorted(ds)))
    total = Fraction(0)
    for k in range(m):
        total += (
            Fraction((-1) ** k * comb(m - 1, k))
            * kappa_tau(g, m - 1 - k, tuple(sorted(ds + (k + 2,))))
        )
    return total


def volume_polynomial(sig) -> VolumePolynomial:
    """V_{g,n} in the public convention, assembled from intersection numbers."""
    if not isinstance(sig, Signature):
        sig = Signature(*sig)
    g, n = sig.g, sig.n
    d = sig.dim
    coeffs = {}
    for alpha in _bounded_partitions(d, n):
        m = d - sum(alpha)
        padded = alpha + (0,) * (n - len(alpha))
        bracket = kappa_tau(g, m, tuple(sorted(padded)))
        if bracket == 0:
            continue
        q = Fraction(2 ** m, factorial(m)) * bracket
        for a in alpha:
            q /= Fraction(2 ** a * factorial(a))
        if q:
            coeffs[_cls(alpha)] = q
    if (g, n) == (1, 1):
        coeffs = {mu: 2 * q for mu, q in coeffs.items()}
    return VolumePolynomial(sig, coeffs)


def _bounded_partitions(total_max, max_parts):
    """Partitions with at most ``max_parts`` parts and weight <= total_max."""
    out = [()]

    def rec(remaining, maxpart, prefix):
        for p in range(min(remaining, maxpart), 0, -1):
            if len(prefix) + 1 <= max_parts:
                nxt = prefix + [p]
                out.append(tuple(nxt))
                rec(remaining - p, p, nxt)

    rec(total_max, total_max, [])
    return out
