"""Adaptive Gauss-Kronrod quadrature and bracketed root finding.

All quadratures in the toolkit go through :func:`quad`: adaptive bisection
on G7/K15 panels with an absolute tolerance and a hard evaluation budget.
The budget guards against integrands with indicator-like behaviour; hitting
it raises :class:`~wpkit.errors.NumericalError` carrying the achieved
tolerance.
"""

from __future__ import annotations

import heapq
import math

from .errors import NumericalError

# G7/K15 nodes on [-1, 1]: (node, Gauss weight, Kronrod weight)
_GK15 = (
    (+0.949107912342759, 0.129484966168870, 0.063092092629979),
    (-0.949107912342759, 0.129484966168870, 0.063092092629979),
    (+0.741531185599394, 0.279705391489277, 0.140653259715525),
    (-0.741531185599394, 0.279705391489277, 0.140653259715525),
    (+0.405845151377397, 0.381830050505119, 0.190350578064785),
    (-0.405845151377397, 0.381830050505119, 0.190350578064785),
    (0.000000000000000, 0.417959183673469, 0.209482141084728),
    (+0.991455371120813, 0.0, 0.022935322010529),
    (-0.991455371120813, 0.0, 0.022935322010529),
    (+0.864864423359769, 0.0, 0.104790010322250),
    (-0.864864423359769, 0.0, 0.104790010322250),
    (+0.586087235467691, 0.0, 0.169004726639267),
    (-0.586087235467691, 0.0, 0.169004726639267),
    (+0.207784955007898, 0.0, 0.204432940075298),
    (-0.207784955007898, 0.0, 0.204432940075298),
)

DEFAULT_TOL = 1e-9
DEFAULT_BUDGET = 10_000_000


def _panel(f, a, b):
    """Return (K15 value, |K15-G7| error estimate, evals) on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    gauss = 0.0
    kron = 0.0
    for x, wg, wk in _GK15:
        fx = f(mid + half * x)
        gauss += wg * fx
        kron += wk * fx
    return kron * half, abs(kron - gauss) * half, 15


def quad(f, a, b, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Integrate f on [a, b] to absolute tolerance ``tol``.

    Adaptive interval bisection, always splitting the interval with the
    largest current error estimate.
    """
    if a == b:
        return 0.0
    if b < a:
        return -quad(f, b, a, tol=tol, budget=budget)
    val, err, used = _panel(f, a, b)
    # heap of (-error, a, b, value); counter breaks ties deterministically
    heap = [(-err, 0, a, b, val)]
    total_err = err
    count = 1
    while total_err > tol:
        if used >= budget:
            raise NumericalError(
                f"quadrature budget {budget} exhausted on [{a}, {b}]",
                achieved=total_err,
            )
        neg_err, _, lo, hi, old_val = heapq.heappop(heap)
        total_err += neg_err  # neg_err = -err of the popped panel
        mid = 0.5 * (lo + hi)
        v1, e1, n1 = _panel(f, lo, mid)
        v2, e2, n2 = _panel(f, mid, hi)
        used += n1 + n2
        if mid in (lo, hi):  # cannot refine further at float resolution
            total_err += -neg_err
            heapq.heappush(heap, (neg_err, count, lo, hi, old_val))
            count += 1
            break
        heapq.heappush(heap, (-e1, count, lo, mid, v1))
        heapq.heappush(heap, (-e2, count + 1, mid, hi, v2))
        count += 2
        total_err += e1 + e2
    return math.fsum(item[4] for item in heap)


def quad_to_inf(f, a, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, cut=None):
    """Integrate f on [a, +inf) for integrands with (super)exponential decay.

    Maps [a, inf) to doubling panels and stops when a panel contributes
    less than ``tol / 4``; ``cut`` forces a finite right end instead.
    """
    if cut is not None:
        return quad(f, a, cut, tol=tol, budget=budget)
    total = 0.0
    lo = a
    width = 1.0
    remaining = budget
    for _ in range(200):
        hi = lo + width
        piece = quad(f, lo, hi, tol=tol / 8.0, budget=remaining)
        total += piece
        lo = hi
        width *= 2.0
        if abs(piece) < tol / 4.0 and width > 4.0:
            return total
    raise NumericalError("semi-infinite quadrature did not converge", achieved=None)


def find_root(f, lo, hi, tol=1e-12, max_iter=200):
    """Root of f on the bracket [lo, hi] by Illinois-damped regula falsi.

    f(lo) and f(hi) must have opposite signs.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NumericalError(f"root not bracketed on [{lo}, {hi}]")
    side = 0
    for _ in range(max_iter):
        mid = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < mid < hi):
            mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) == 0.0 or hi - lo < tol:
            return mid
        if flo * fmid < 0:
            hi, fhi = mid, fmid
            if side == -1:
                flo *= 0.5
            side = -1
        else:
            lo, flo = mid, fmid
            if side == 1:
                fhi *= 0.5
            side = 1
    return 0.5 * (lo + hi)
