"""Concrete hyperbolic geometry on pairs of pants and one-holed tori.

Words in the rank-2 free group are tuples over the alphabet
``{1, -1, 2, -2}`` (generator a1, its inverse, a2, its inverse).  A pair of
pants with boundary lengths (b1, b2, b3) is realised by an explicit
discrete SL(2,R) representation with trace triple

    tr A1 = -2 cosh(b1/2),  tr A2 = -2 cosh(b2/2),  tr A1A2 = -2 cosh(b3/2)

so that a1, a2 and a1 a2 are the three boundary curves and every word's
translation length is 2 arccosh(|tr|/2).

The census machinery realises the tangle-free word normal form: any filling
geodesic of length <= L = A log g on a pants whose boundaries satisfy the
tangle-free length bounds is cyclically equivalent to
a1^{m_1} a2^{m_2} ... a2^{m_2k} with k <= ceil(A/kappa) and
|m_i| <= M = 1 + ceil(L/kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NumericalError, ResourceCapError
from .quadrature import find_root, quad

# ----------------------------------------------------------------------
# free words on two generators


def reduce_word(letters):
    """Freely reduce a letter sequence."""
    out = []
    for letter in letters:
        if letter not in (1, -1, 2, -2):
            raise DomainError(f"bad letter {letter}")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def inverse_word(word):
    return tuple(-letter for letter in reversed(word))


def cyclic_reduce(word):
    word = reduce_word(word)
    while len(word) >= 2 and word[0] == -word[-1]:
        word = word[1:-1]
    return word


def is_cyclically_reduced(word):
    word = tuple(word)
    if not word:
        return True
    return reduce_word(word) == word and word[0] != -word[-1]


def canonical_rotation(word):
    """Lexicographically minimal rotation of a cyclic word."""
    if not word:
        return ()
    return min(word[i:] + word[:i] for i in range(len(word)))


def canonical_class(word):
    """Canonical form under rotation and inversion (unoriented geodesic)."""
    word = cyclic_reduce(word)
    if not word:
        return ()
    return min(canonical_rotation(word), canonical_rotation(inverse_word(word)))


def blocks(word):
    """Maximal runs of a single generator: [(gen, signed exponent), ...].

    The word must be cyclically reduced; the first and last run are merged
    when they share a generator (cyclic reading).
    """
    word = tuple(word)
    if not word:
        return []
    runs = []
    for letter in word:
        gen = abs(letter)
        exp = 1 if letter > 0 else -1
        if runs and runs[-1][0] == gen:
            runs[-1][1] += exp
        else:
            runs.append([gen, exp])
    if len(runs) > 1 and runs[0][0] == runs[-1][0]:
        runs[0][1] += runs[-1][1]
        runs.pop()
    return [(gen, exp) for gen, exp in runs]


def is_filling(word):
    """A closed geodesic on a pair of pants either is boundary-parallel or
    fills; boundary classes are powers of a1, a2 and a1 a2."""
    word = cyclic_reduce(word)
    if not word:
        raise DomainError("empty word")
    gens = {abs(letter) for letter in word}
    if len(gens) == 1:
        return False
    # powers of (a1 a2)^{+-1}: alternating blocks all of exponent +1 or all -1
    run = blocks(word)
    if all(exp == 1 for _, exp in run) or all(exp == -1 for _, exp in run):
        return False
    return True


def enumerate_conjugacy_classes(max_letters):
    """Canonical representatives of cyclic words up to rotation + inversion,
    cyclically reduced, of length 1..max_letters."""
    out = []
    word = []

    def dfs():
        if word:
            tup = tuple(word)
            if tup[0] != -tup[-1]:
                if canonical_class(tup) == tup:
                    out.append(tup)
        if len(word) == max_letters:
            return
        for letter in (1, -1, 2, -2):
            if word and word[-1] == -letter:
                continue
            word.append(letter)
            dfs()
            word.pop()

    dfs()
    return out


# ----------------------------------------------------------------------
# pants models


def _mat_mul(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _mat_inv(a):
    return (a[3], -a[1], -a[2], a[0])  # det = 1


@dataclass(frozen=True)
class PantsModel:
    b1: float
    b2: float
    b3: float
    A1: tuple
    A2: tuple
    letters: dict = field(repr=False, default=None)

    def matrix(self, word):
        out = (1.0, 0.0, 0.0, 1.0)
        for letter in word:
            out = _mat_mul(out, self.letters[letter])
        return out

    def trace(self, word):
        m = self.matrix(word)
        return m[0] + m[3]


def pants_from_lengths(b1, b2, b3, parametrization="upper"):
    """Discrete pants representation with the all-negative trace triple.

    ``upper``: A1 = [[x, -1], [1, 0]] with x = -2 cosh(b1/2) and
    A2 = [[0, c], [-1/c, y]] with y = -2 cosh(b2/2); then tr(A1 A2) = c + 1/c
    independent of x, y, and c < -1 solves c + 1/c = -2 cosh(b3/2).

    ``axes``: A1 translates along the imaginary axis, A2 along a geodesic at
    distance d across a common perpendicular, with cosh d given by the
    right-angled hexagon relation.  Used as the independent cross-check.
    """
    if min(b1, b2, b3) <= 0:
        raise DomainError("boundary lengths must be positive")
    c1, c2, c3 = (math.cosh(b / 2) for b in (b1, b2, b3))
    if parametrization == "upper":
        x = -2.0 * c1
        y = -2.0 * c2
        z = -2.0 * c3
        c = (z - math.sqrt(z * z - 4.0)) / 2.0  # the root < -1
        a1 = (x, -1.0, 1.0, 0.0)
        a2 = (0.0, c, -1.0 / c, y)
    elif parametrization == "axes":
        s1, s2 = math.sinh(b1 / 2), math.sinh(b2 / 2)
        lam = math.exp(b1 / 2)
        mu = math.exp(b2 / 2)
        a1 = (lam, 0.0, 0.0, 1.0 / lam)
        cosh_d = (c1 * c2 + c3) / (s1 * s2)
        dh = math.acosh(cosh_d) / 2.0
        ch, sh = math.cosh(dh), math.sinh(dh)
        t2 = (1.0 / mu, 0.0, 0.0, mu)
        g = (ch, sh, sh, ch)
        a2 = _mat_mul(_mat_mul(g, t2), _mat_inv(g))
    else:
        raise DomainError(f"unknown parametrization {parametrization!r}")
    letters = {1: a1, -1: _mat_inv(a1), 2: a2, -2: _mat_inv(a2)}
    return PantsModel(b1, b2, b3, a1, a2, letters)


def geodesic_length(model, word):
    """Translation length 2 arccosh(|tr|/2) of a cyclically reduced word."""
    word = tuple(word)
    if not word:
        raise DomainError("empty word")
    if not is_cyclically_reduced(word):
        raise DomainError("word is not cyclically reduced")
    tr = abs(model.trace(word))
    if tr < 2.0 - 1e-9:
        raise NumericalError(f"word {word} is not hyperbolic (|tr| = {tr})")
    return 2.0 * math.acosh(max(tr / 2.0, 1.0))


def seam_data(model):
    """Feet of the self-orthogeodesic of b3 separating b1 from b2.

    Returns (t1, t2, alpha_length): t_i is the arc of b3 on the side of b_i,
    alpha the orthogeodesic length.  Right-angled pentagon relations:
    cosh(b2/2) = sinh(h) sinh(u) and cosh(b1/2) = sinh(h) sinh(b3/2 - u)
    for the half-quantities h = alpha/2, u = t2/2.
    """
    c1 = math.cosh(model.b1 / 2.0)
    c2 = math.cosh(model.b2 / 2.0)
    half = model.b3 / 2.0

    def balance(u):
        return math.log(math.sinh(half - u)) - math.log(math.sinh(u)) - math.log(c1 / c2)

    eps = 1e-13
    u = find_root(balance, eps, half - eps, tol=1e-14)
    h = math.asinh(c2 / math.sinh(u))
    # cross-check the second pentagon
    resid = math.sinh(h) * math.sinh(half - u) - c1
    if abs(resid) > 1e-8 * c1:
        raise NumericalError(f"pentagon relations inconsistent, residual {resid}")
    t2 = 2.0 * u
    t1 = model.b3 - t2
    return t1, t2, 2.0 * h


# ----------------------------------------------------------------------
# census of tangle-free word shapes


@dataclass(frozen=True)
class Census:
    kappa: float
    log_factor: float  # A
    g: float
    L: float
    R: float
    M: int
    k_max: int
    words: tuple = None  # canonical word set when materialised

    def contains(self, word):
        """Cyclic-equivalence membership, decided structurally."""
        word = cyclic_reduce(word)
        if not word or not is_filling(word):
            return False
        run = blocks(word)
        if len(run) % 2 != 0:
            return False
        k = len(run) // 2
        if k < 1 or k > self.k_max:
            return False
        return all(abs(exp) <= self.M for _, exp in run)

    @property
    def cardinality_bound(self):
        return (2 * self.M + 1) ** (2 * self.k_max)


def census_parameters(kappa, log_factor, g):
    if not (0 < kappa <= 1):
        raise DomainError("kappa must lie in (0, 1]")
    if log_factor < 1:
        raise DomainError("A must be >= 1")
    if g < 2:
        raise DomainError("g must be >= 2")
    L = log_factor * math.log(g)
    R = kappa * math.log(g)
    M = 1 + math.ceil(L / kappa)
    k_max = math.ceil(log_factor / kappa)
    return L, R, M, k_max


def census_loc_types(kappa, log_factor, g, size_cap=500_000):
    """Materialised census word set, deduplicated up to rotation+inversion."""
    L, R, M, k_max = census_parameters(kappa, log_factor, g)
    raw = 0
    for k in range(1, k_max + 1):
        raw += (2 * M) ** (2 * k)
    if raw > size_cap:
        raise ResourceCapError(
            f"census would enumerate {raw} words, over the cap {size_cap}"
        )
    words = set()
    exps = [e for e in range(-M, M + 1) if e != 0]

    def build(k):
        slots = [exps] * (2 * k)
        stack = [(0, ())]
        while stack:
            i, prefix = stack.pop()
            if i == 2 * k:
                word = []
                for idx, m in enumerate(prefix):
                    gen = 1 if idx % 2 == 0 else 2
                    word.extend([gen if m > 0 else -gen] * abs(m))
                # boundary-parallel sign patterns are not local types of
                # filling geodesics
                if is_filling(word):
                    words.add(canonical_class(word))
                continue
            for e in slots[i]:
                stack.append((i + 1, prefix + (e,)))

    for k in range(1, k_max + 1):
        build(k)
    words.discard(())
    return Census(kappa, log_factor, g, L, R, M, k_max, tuple(sorted(words)))


def census_structural(kappa, log_factor, g):
    """Census with membership decided structurally (no materialised set)."""
    L, R, M, k_max = census_parameters(kappa, log_factor, g)
    return Census(kappa, log_factor, g, L, R, M, k_max, None)


@dataclass
class CensusReport:
    kappa: float
    log_factor: float
    g: float
    L: float
    R: float
    M: int
    k_max: int
    word_cap: int
    classes_scanned: int
    filling_found: int
    escapes: list
    inequality_failures: list
    ok: bool


def verify_census(model, kappa, log_factor, g, word_cap=12, length_tol=1e-9):
    """Exhaustive check of the census on one pants model.

    Enumerates every conjugacy class up to ``word_cap`` letters, keeps the
    filling ones of geodesic length <= L, and verifies (i) membership in the
    census word shape and (ii) the proof's length inequalities
    ell >= k (t1 + t2) and ell >= sum_i max(t_{side(i)}, (|m_i| - 1) kappa).
    """
    census = census_structural(kappa, log_factor, g)
    L, R = census.L, census.R
    if model.b1 < kappa or model.b2 < kappa:
        raise DomainError("tangle-free hypothesis b1, b2 >= kappa violated")
    if model.b3 < R:
        raise DomainError("tangle-free hypothesis b3 >= R violated")
    t1, t2, _alpha = seam_data(model)
    escapes = []
    ineq_failures = []
    found = 0
    classes = enumerate_conjugacy_classes(word_cap)
    for word in classes:
        if not is_filling(word):
            continue
        ell = geodesic_length(model, word)
        if ell > L + length_tol:
            continue
        found += 1
        if not census.contains(word):
            escapes.append((word, ell))
            continue
        run = blocks(word)
        k = len(run) // 2
        if ell < k * (t1 + t2) - 1e-7:
            ineq_failures.append((word, ell, "k(t1+t2)", k * (t1 + t2)))
        lower = 0.0
        for gen, exp in run:
            t_side = t1 if gen == 1 else t2
            lower += max(t_side, (abs(exp) - 1) * kappa)
        if ell < lower - 1e-7:
            ineq_failures.append((word, ell, "segment sum", lower))
        if k > L / R + 1e-9:
            ineq_failures.append((word, ell, "k <= L/R", L / R))
    return CensusReport(
        kappa=kappa,
        log_factor=log_factor,
        g=g,
        L=L,
        R=R,
        M=census.M,
        k_max=census.k_max,
        word_cap=word_cap,
        classes_scanned=len(classes),
        filling_found=found,
        escapes=escapes,
        inequality_failures=ineq_failures,
        ok=not escapes and not ineq_failures,
    )


# ----------------------------------------------------------------------
# one-holed torus: length identities and the twist-window integral


@dataclass(frozen=True)
class TorusModel:
    """One-holed torus in cut coordinates: boundary length x, cut-curve
    length ell, twist theta; p and r are the derived orthogeodesic and
    crossing-loop lengths."""

    x: float
    ell: float
    theta: float

    def __post_init__(self):
        if self.x < 0 or self.ell <= 0:
            raise DomainError("need x >= 0 and ell > 0")

    @property
    def p(self):
        return torus_identities(self.x, self.ell, self.theta)[0]

    @property
    def r(self):
        return torus_identities(self.x, self.ell, self.theta)[1]


def torus_identities(x, ell, theta):
    """(p, r) from the one-holed-torus length identities.

    cosh(p) = (cosh(x/2) + cosh^2(ell/2)) / sinh^2(ell/2) and
    cosh(r/2) = cosh(theta/2) cosh(p/2): p is the orthogeodesic between the
    two cut boundaries, r the length of the once-intersecting simple loop.
    """
    if ell <= 0 or x < 0:
        raise DomainError("need ell > 0 and x >= 0")
    s2 = math.sinh(ell / 2.0) ** 2
    cosh_p = (math.cosh(x / 2.0) + math.cosh(ell / 2.0) ** 2) / s2
    if cosh_p < 1.0:
        raise DomainError("geometrically infeasible (cosh p < 1)")
    p = math.acosh(cosh_p)
    r = 2.0 * math.acosh(math.cosh(theta / 2.0) * math.cosh(p / 2.0))
    return p, r


def torus_inverse(p, r, ell):
    """Invert torus_identities: recover (x, theta) from (p, r)."""
    s2 = math.sinh(ell / 2.0) ** 2
    cosh_half_x = math.cosh(p) * s2 - math.cosh(ell / 2.0) ** 2
    if cosh_half_x < 1.0:
        raise DomainError("no boundary length realises this p")
    x = 2.0 * math.acosh(cosh_half_x)
    ratio = math.cosh(r / 2.0) / math.cosh(p / 2.0)
    if ratio < 1.0:
        raise DomainError("r < p is impossible")
    theta = 2.0 * math.acosh(ratio)
    return x, theta


def j_kappa_closed(ell, kappa):
    """Closed form of J_kappa(ell): the inner integral of
    P dP / sqrt(R^2 - P^2) is elementary, and the remaining
    int_{P0}^{K} sqrt(R^2 - P0^2) dR closes too."""
    if ell <= 0 or kappa <= 0:
        raise DomainError("need ell, kappa > 0")
    big_k = math.cosh(kappa / 2.0)
    p0 = 1.0 / math.tanh(ell / 2.0)
    if big_k <= p0:
        return 0.0
    root = math.sqrt(big_k * big_k - p0 * p0)
    inner = big_k * root / 2.0 - p0 * p0 / 2.0 * math.log((big_k + root) / p0)
    return 16.0 * math.sinh(ell / 2.0) ** 2 * inner


def j_kappa_limit(kappa):
    """lim_{ell -> inf} J_kappa(ell) / (16 sinh^2(ell/2))."""
    big_k = math.cosh(kappa / 2.0)
    root = math.sqrt(big_k * big_k - 1.0)
    return big_k * root / 2.0 - 0.5 * math.log(big_k + root)


def j_kappa_direct(ell, kappa, tol=1e-9):
    """J_kappa(ell) by quadrature over (x, theta) with the indicator
    r(x, ell, theta) <= kappa resolved by bisection on the raw identities."""
    if ell <= 0 or kappa <= 0:
        raise DomainError("need ell, kappa > 0")
    p_min, _ = torus_identities(0.0, ell, 0.0)
    if p_min >= kappa:
        return 0.0

    def p_of(x):
        return torus_identities(x, ell, 0.0)[0]

    hi = 1.0
    while p_of(hi) < kappa:
        hi *= 2.0
    x_max = find_root(lambda x: p_of(x) - kappa, 0.0, hi, tol=1e-13)

    def theta_width(x):
        # one-sided twist window: theta and -theta carry the same unoriented
        # loop, and the closed form integrates the window once
        p, r0 = torus_identities(x, ell, 0.0)
        if r0 >= kappa:
            return 0.0
        t_hi = 1.0
        while torus_identities(x, ell, t_hi)[1] < kappa:
            t_hi *= 2.0
        return find_root(
            lambda t: torus_identities(x, ell, t)[1] - kappa, 0.0, t_hi, tol=1e-13
        )

    scale = max(j_kappa_closed(ell, kappa), 1e-30)
    return quad(
        lambda x: math.sinh(x / 2.0) * theta_width(x),
        0.0,
        x_max,
        tol=tol * scale,
        budget=2_000_000,
    )


def j_kappa(ell, kappa, tol=1e-9):
    """Both evaluations of J_kappa(ell): (closed form, direct quadrature)."""
    closed = j_kappa_closed(ell, kappa)
    direct = j_kappa_direct(ell, kappa, tol=tol)
    return closed, direct
