"""Inclusion-exclusion layer: indicator identities, weight functions, the
printed term ledgers, the phi realization-sum evaluator and the rank
truncation check.

The two ledgers are *golden data*: the case enumerations behind them are
hand-encoded term by term in the printed arrangement (seven families for
the simple local type, three for a pants-filling type) and pinned by unit
tests; they are not re-derived.

phi evaluation follows

    phi_{g,Q}(x, y) = (x_1 ... x_{n_S} y_1 ... y_j / V_g)
                      * sum over realizations of prod_parts V_{g_i, n_i}(...)

at the skeleton level: a realization skeleton records the complement pieces
and which curve each boundary glues to.  Cylinders contribute their length
argument twice to the piece volumes and once to the prefactor.  Realizations
in which two boundaries of the filling piece coincide (the Dirac-type
degenerations) are not skeletons; the densities module evaluates those
separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import comb

import numpy as np

from .errors import DomainError, ResourceCapError
from .quadrature import quad

# ----------------------------------------------------------------------
# exact indicator identities


def indicator_identity(n):
    """sum_j (-1)^j C(n, j): 1 for n = 0, else 0; exact integers."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return sum((-1) ** j * comb(n, j) for j in range(n + 1))


def tangle_sandwich(n):
    """Check 0 <= n - 1[n >= 1] <= C(n, 2); returns (lower_ok, upper_ok)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    middle = n - (1 if n >= 1 else 0)
    return middle >= 0, middle <= comb(n, 2)


# ----------------------------------------------------------------------
# the scalar integrals I_kappa and I(kappa)


def i_kappa_weight(kappa):
    """I_kappa = int_0^kappa l exp(l/2) dl = 4 + 2 (kappa - 2) exp(kappa/2)."""
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    return 4.0 + 2.0 * (kappa - 2.0) * math.exp(kappa / 2.0)


def i_kappa_weight_quadrature(kappa, tol=1e-13):
    return quad(lambda l: l * math.exp(l / 2.0), 0.0, kappa, tol=tol)


def i_small(kappa, rel_tol=1e-14):
    """I(kappa) = int_0^kappa 4 sinh^2(x/2) dx / x, via the entire series
    sum_{k>=1} 2 kappa^(2k) / (2k (2k)!) with a certified remainder."""
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    total = 0.0
    k = 1
    while True:
        term = 2.0 * kappa ** (2 * k) / (2 * k * math.factorial(2 * k))
        total += term
        # next-term ratio < kappa^2 / ((2k+1)(2k+2)) once kappa <= 2k
        nxt = 2.0 * kappa ** (2 * k + 2) / ((2 * k + 2) * math.factorial(2 * k + 2))
        if nxt < rel_tol * total:
            return total
        k += 1
        if k > 500:
            raise ResourceCapError("I(kappa) series did not converge")


def i_small_quadrature(kappa, tol=1e-13):
    return quad(lambda x: 4.0 * math.sinh(x / 2.0) ** 2 / x if x > 0 else 0.0,
                1e-12, kappa, tol=tol)


# ----------------------------------------------------------------------
# weight functions and the golden term ledgers


@dataclass(frozen=True)
class WeightFunction:
    """sign(j) / j! * prod of interval indicators [0, cutoff]."""

    kind: str  # short_loop_product | tangle_boundary | unit
    cutoff_kind: str  # "kappa" | "R" | None
    arity: int

    def __post_init__(self):
        if self.kind not in ("short_loop_product", "tangle_boundary", "unit"):
            raise DomainError(f"unknown weight kind {self.kind}")

    @property
    def label(self):
        if self.kind == "unit":
            return "F"
        base = "mu_kappa" if self.cutoff_kind == "kappa" else "mu_R"
        return f"{base}^{self.arity}"

    def evaluate(self, lengths, cutoff):
        lengths = tuple(lengths)
        if self.kind == "unit":
            return 1.0
        if len(lengths) != self.arity:
            raise DomainError("arity mismatch")
        ind = all(0.0 <= l <= cutoff for l in lengths)
        return ((-1) ** self.arity / math.factorial(self.arity)) * (1.0 if ind else 0.0)


def mu_kappa(j):
    return WeightFunction("short_loop_product", "kappa", j)


def mu_r(k):
    return WeightFunction("tangle_boundary", "R", k)


_F = WeightFunction("unit", None, 0)


@dataclass(frozen=True)
class AverageTerm:
    """One signed family of the inclusion-exclusion formulas."""

    sign: int
    base_tag: str
    base_chi: int  # absolute Euler characteristic of the base local type
    weights: tuple  # WeightFunction entries applied after F
    rho_j: bool = True  # carries the sum over j with mu_kappa^j
    family: bool = False  # sums over a set of local types
    normalization: Fraction = Fraction(1)  # n(T); defined elsewhere, default 1

    def __post_init__(self):
        if self.base_chi > 1:
            raise DomainError("ledger admits only base types with |chi| <= 1")

    def describe(self):
        labels = ["F"] + [w.label for w in self.weights]
        return {
            "sign": self.sign,
            "base_tag": self.base_tag,
            "weights": labels,
            "rho_j": self.rho_j,
            "family": self.family,
        }


def ledger_simple():
    """The seven term families for the simple local type, printed order."""
    return [
        AverageTerm(+1, "s", 0, ()),
        AverageTerm(-1, "Loc_{1,1}^{2s}", 1, (mu_kappa(1),), family=True),
        AverageTerm(-1, "(s, T_{0,3}^d)", 1, (mu_r(3),)),
        AverageTerm(-1, "(s, T_{1,1}^d)", 1, (mu_r(1),)),
        AverageTerm(+1, "(s, T_{1,1}^{s,d})", 1, (mu_kappa(1), mu_r(1))),
        AverageTerm(-1, "T_{1,1}^{s,d}", 1, (mu_r(1),)),
        AverageTerm(+1, "Loc_{1,1}^{2s,d}", 1, (mu_kappa(1), mu_r(1)), family=True),
    ]


def ledger_pants(base_tag="T"):
    """The three term families for a local type filling a pair of pants."""
    return [
        AverageTerm(+1, base_tag, 1, ()),
        AverageTerm(-1, f"{base_tag}^d", 1, (mu_r(3),)),
        AverageTerm(+1, f"Loc_{{1,1}}^{{{base_tag},s,d}}", 1, (mu_kappa(1), mu_r(1)), family=True),
    ]


def ledger_json(terms):
    return [t.describe() for t in terms]


# ----------------------------------------------------------------------
# phi realization skeletons


@dataclass(frozen=True)
class PhiSkeleton:
    """Skeleton of a realization of the filling piece and j cylinders.

    ``parts`` lists complement piece genera; ``x_attach`` records, per
    boundary of the filling piece, the part it glues to (for the cylinder
    filling type the single core curve is recorded as an unordered part
    pair); ``y_edges`` records the two sides of each cylinder.
    """

    filling: str
    parts: tuple  # genera
    x_attach: tuple
    y_edges: tuple

    def part_boundary_counts(self):
        q = len(self.parts)
        deg = [0] * q
        if self.filling == "pants":
            for t in self.x_attach:
                deg[t] += 1
        else:
            a, b = self.x_attach
            deg[a] += 1
            deg[b] += 1
        for a, b in self.y_edges:
            deg[a] += 1
            deg[b] += 1
        return deg


_N_S = {"cylinder": 2, "pants": 3}
_CHI_S = {"cylinder": 0, "pants": 1}


def _components_after_y_removal(skel):
    """Pieces left when cutting along the j cylinders only."""
    q = len(skel.parts)
    if skel.filling == "pants":
        nodes = q + 1  # extra node for the pants piece
    else:
        nodes = q
    parent = list(range(nodes))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        parent[find(a)] = find(b)

    if skel.filling == "pants":
        for t in skel.x_attach:
            union(q, t)
    else:
        a, b = skel.x_attach
        union(a, b)
    return len({find(v) for v in range(nodes)})


def _connected_whole(skel):
    q = len(skel.parts)
    nodes = q + 1 if skel.filling == "pants" else q
    parent = list(range(nodes))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        parent[find(a)] = find(b)

    if skel.filling == "pants":
        for t in skel.x_attach:
            union(q, t)
    else:
        a, b = skel.x_attach
        union(a, b)
    for a, b in skel.y_edges:
        union(a, b)
    return len({find(v) for v in range(nodes)}) == 1


def _canonical_skeleton(filling, genera, x_attach, y_edges):
    q = len(genera)
    best = None
    for perm in permutations(range(q)):
        relabel = {old: new for new, old in enumerate(perm)}
        new_parts = tuple(genera[old] for old in perm)
        if filling == "pants":
            new_x = tuple(relabel[t] for t in x_attach)
        else:
            a, b = x_attach
            new_x = tuple(sorted((relabel[a], relabel[b])))
        new_y = tuple(tuple(sorted((relabel[a], relabel[b]))) for a, b in y_edges)
        cand = (new_parts, new_x, new_y)
        if best is None or cand < best:
            best = cand
    return PhiSkeleton(filling, best[0], best[1], best[2])


@lru_cache(maxsize=None)
def _shape_catalog(filling, j, q_bound):
    """Genus-free skeleton shapes: (q, x_attach, y_edges, degrees, auts).

    Shapes are canonical under part permutation; ``auts`` is the shape's
    automorphism group, used to deduplicate genus assignments cheaply.
    The cylinder cut leaves at least q - 1 (pants: q - 2) pieces when the
    cylinders are removed, which caps q at Q + 1 (Q + 2).
    """
    n_ends = (2 if filling == "cylinder" else 3) + 2 * j
    q_cap = q_bound + (1 if filling == "cylinder" else 2)
    shapes = []
    for q in range(1, min(q_cap, n_ends) + 1):
        pairs = [(a, b) for a in range(q) for b in range(a, q)]
        if filling == "pants":
            x_options = list(product(range(q), repeat=3))
        else:
            x_options = pairs
        seen = {}
        for x_attach in x_options:
            for y_sel in product(pairs, repeat=j):
                skel0 = PhiSkeleton(filling, (0,) * q, tuple(x_attach), tuple(y_sel))
                deg = skel0.part_boundary_counts()
                if any(d == 0 for d in deg):
                    continue
                if not _connected_whole(skel0):
                    continue
                if _components_after_y_removal(skel0) > q_bound:
                    continue
                canon = _canonical_skeleton(filling, (0,) * q, skel0.x_attach,
                                            skel0.y_edges)
                seen[(canon.x_attach, canon.y_edges)] = canon
        for canon in seen.values():
            degrees = tuple(canon.part_boundary_counts())
            auts = []
            for perm in permutations(range(q)):
                relabel = {old: new for new, old in enumerate(perm)}
                if filling == "pants":
                    new_x = tuple(relabel[t] for t in canon.x_attach)
                else:
                    a, b = canon.x_attach
                    new_x = tuple(sorted((relabel[a], relabel[b])))
                new_y = tuple(tuple(sorted((relabel[a], relabel[b])))
                              for a, b in canon.y_edges)
                if (new_x, new_y) == (canon.x_attach, canon.y_edges):
                    auts.append(perm)
            shapes.append((q, canon.x_attach, canon.y_edges, degrees, tuple(auts)))
    return tuple(shapes)


def enumerate_phi_skeletons(filling, j, q_bound, g, cap=5_000_000):
    """All realization skeletons of the filling piece plus j cylinders in a
    closed genus-g surface whose cylinders cut off at most ``q_bound``
    pieces."""
    if filling not in _N_S:
        raise DomainError(f"filling type must be cylinder or pants, got {filling}")
    if j < 0 or q_bound < 1 or g < 2:
        raise DomainError("need j >= 0, Q >= 1, g >= 2")
    chi_off = 2 if filling == "cylinder" else 3
    out = []
    count = 0
    for q, x_attach, y_edges, degrees, auts in _shape_catalog(filling, j, q_bound):
        genus_sum = g + q - j - chi_off
        if genus_sum < 0:
            continue
        seen_genera = set()
        for genera in _compositions(genus_sum, q):
            count += 1
            if count > cap:
                raise ResourceCapError("phi skeleton enumeration cap exceeded")
            if any(2 * genera[i] - 2 + degrees[i] <= 0 for i in range(q)):
                continue
            if len(auts) > 1:
                canon_g = min(tuple(genera[p] for p in perm) for perm in auts)
                if canon_g in seen_genera:
                    continue
                seen_genera.add(canon_g)
                genera = canon_g
            out.append(PhiSkeleton(filling, tuple(genera), x_attach, y_edges))
    return sorted(out, key=lambda s: (len(s.parts), s.parts, s.x_attach, s.y_edges))


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class PhiEvaluation:
    filling: str
    j: int
    q_bound: int
    g: int
    x: tuple
    y: tuple
    value: float
    skeleton_values: list  # (skeleton, float) pairs


def phi_evaluate(filling, j, q_bound, g, x, y, cache=None, j_max=12):
    """Evaluate phi_{g,Q} at boundary arguments x (filling piece) and y
    (cylinders).  x is a scalar for the cylinder, a triple for the pants."""
    from .volumes import Signature, default_cache

    cache = cache or default_cache()
    if j > j_max:
        raise ResourceCapError(f"j = {j} exceeds j_max = {j_max}")
    if filling == "cylinder":
        xs = (float(x), float(x)) if not isinstance(x, (tuple, list)) else tuple(x)
        if len(xs) != 2 or xs[0] != xs[1]:
            raise DomainError("cylinder boundary arguments must coincide")
    else:
        xs = tuple(float(v) for v in x)
        if len(xs) != 3:
            raise DomainError("pants needs three boundary arguments")
    ys = tuple(float(v) for v in y)
    if len(ys) != j:
        raise DomainError("y must have length j")

    skeletons = enumerate_phi_skeletons(filling, j, q_bound, g)
    vg = cache.constant_float(g, 0)
    pref = 1.0
    for v in xs:
        pref *= v
    for v in ys:
        pref *= v
    values = []
    total = 0.0
    for skel in skeletons:
        args = [[] for _ in skel.parts]
        if filling == "pants":
            for b_idx, t in enumerate(skel.x_attach):
                args[t].append(xs[b_idx])
        else:
            a, b = skel.x_attach
            args[a].append(xs[0])
            args[b].append(xs[1])
        for i, (a, b) in enumerate(skel.y_edges):
            args[a].append(ys[i])
            args[b].append(ys[i])
        term = 1.0
        for gi, arg in zip(skel.parts, args):
            poly = cache.compute(Signature(gi, len(arg)))
            term *= float(poly.evaluate(arg))
        values.append((skel, term))
        total += term
    return PhiEvaluation(filling, j, q_bound, g, xs, ys, pref / vg * total, values)


# ----------------------------------------------------------------------
# rank truncation


def _family_key(skel):
    """Key identifying a skeleton family across the genus scan: the maximal
    genus entry is replaced by a marker, everything else kept."""
    if not skel.parts:
        return (skel.filling, (), skel.x_attach, skel.y_edges)
    big = max(range(len(skel.parts)), key=lambda i: skel.parts[i])
    marked = tuple(
        "G" if i == big else skel.parts[i] for i in range(len(skel.parts))
    )
    return (skel.filling, marked, skel.x_attach, skel.y_edges)


@dataclass
class RankReport:
    filling: str
    j: int
    q_bound: int
    n_power: int
    g_range: tuple
    families: dict  # key -> {"rank": float, "values": [...]}
    untracked: list
    truncated_sums: dict  # g -> sum over rank >= N
    fitted_d: float
    fitted_d_per_term: float
    rhs: dict  # g -> bound with fitted D
    ok: bool


def rank_truncation_check(filling, j, q_bound, n_power, g_range, cache=None,
                          rank_tol=0.25):
    """Measure realization ranks over a genus scan and verify the truncated
    sum against 2^((n_S+2j)(Q+n_S)) D^(Q+n_S) / g^N with fitted D.

    The rank of a skeleton family is the fitted decay exponent of
    t(g) = (V_{g_S,n_S} / V_g) prod_parts V_{g_i,n_i}(0) (V of the cylinder
    piece taken as 1).  Families must track over at least 5 scan points;
    untracked skeletons are treated as rank infinity (they join every
    truncated sum).
    """
    from .volumes import Signature, default_cache

    cache = cache or default_cache()
    g_range = tuple(g_range)
    if len(g_range) < 5:
        raise DomainError("rank fit needs at least 5 genus values")
    n_s = _N_S[filling]
    chi_s = _CHI_S[filling]
    prefactor = 1.0  # V_{0,3} = 1 for pants, V_cyl := 1

    per_family = {}
    per_g_all = {}
    for g in g_range:
        vg = cache.constant_float(g, 0)
        for skel in enumerate_phi_skeletons(filling, j, q_bound, g):
            deg = skel.part_boundary_counts()
            t = prefactor / vg
            for gi, d in zip(skel.parts, deg):
                t *= cache.constant_float(gi, d)
            per_family.setdefault(_family_key(skel), {})[g] = t
            per_g_all.setdefault(g, []).append((skel, t))

    families = {}
    untracked = []
    for key, values in per_family.items():
        if len(values) < 5:
            untracked.append((key, values))
            continue
        # the rank is an asymptotic height: fit the top of the scan window
        # (>= 5 points) to keep the low-genus transient out of the estimate
        gs = sorted(values)[-5:]
        xs = np.log([float(g) for g in gs])
        ysv = np.log([values[g] for g in gs])
        slope, _ = np.polyfit(xs, ysv, 1)
        families[key] = {"rank": -float(slope), "values": values}

    truncated = {}
    for g in g_range:
        s = 0.0
        for key, info in families.items():
            if info["rank"] >= n_power and g in info["values"]:
                s += info["values"][g]
        for key, values in untracked:
            s += values.get(g, 0.0)
        truncated[g] = s

    exp2 = 2 ** ((n_s + 2 * j) * (q_bound + n_s))
    power = q_bound + n_s
    fitted_d = 0.0
    for g, s in truncated.items():
        if s > 0:
            fitted_d = max(fitted_d, (s * g ** n_power / exp2) ** (1.0 / power))
    fitted_d_term = 0.0
    for g, pairs in per_g_all.items():
        for _, t in pairs:
            fitted_d_term = max(fitted_d_term, (t * g ** chi_s) ** (1.0 / power))
    rhs = {g: exp2 * max(fitted_d, 1e-300) ** power / g ** n_power for g in g_range}
    ok = all(
        info["rank"] >= chi_s - rank_tol for info in families.values()
    ) and all(truncated[g] <= rhs[g] * (1 + 1e-9) for g in g_range)
    return RankReport(
        filling=filling,
        j=j,
        q_bound=q_bound,
        n_power=n_power,
        g_range=g_range,
        families=families,
        untracked=untracked,
        truncated_sums=truncated,
        fitted_d=fitted_d,
        fitted_d_per_term=fitted_d_term,
        rhs=rhs,
        ok=ok,
    )
