"""Multicurve splitting types, orbit bounds and the short-loop series.

A multicurve with j components cutting a surface of signature (g, n) is
recorded as its *cut multigraph*: vertices are the complementary pieces,
carrying (genus g_i, number of free legs), edges are the curves (self-loops
allowed).  Euler characteristic bookkeeping forces

    sum_i (2 g_i - 2 + n_i) = 2g - 2 + n,      n_i = legs_i + degree_i,
    sum_i n_i = n + 2j,

every piece is hyperbolic (2 g_i - 2 + n_i > 0) and the multigraph is
connected.  Isomorphism classes are decided by exhaustive vertex-permutation
canonicalisation (piece counts stay tiny here).

The series evaluators bound moments of the weighted short-loop count

    Y_{kappa,Q,beta} = sum_{j>=1} beta^j N_j(Q)

through  sum_j beta^j/j! Q^(2j+1) (2j)^Q I_kappa^j  with
I_kappa = int_0^kappa l exp(l/2) dl, and its tail and exact-component
variants.  Universal prefactors from the literature are configuration
inputs (default 1); every reported bound separates them from the g- and
kappa-dependence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations, product

from .errors import DomainError, ResourceCapError
from .inclexcl import i_kappa_weight

MAX_PARTS_FOR_CANONICAL = 8


@dataclass(frozen=True)
class SplittingType:
    """Isomorphism class of a cut multigraph (canonical form)."""

    g: int
    n: int
    parts: tuple  # ((g_i, legs_i), ...) in canonical order
    edges: tuple  # ((i, j), ...) canonical, self-loops as (i, i)

    @property
    def j(self):
        return len(self.edges)

    @property
    def q(self):
        return len(self.parts)

    def degrees(self):
        deg = [0] * len(self.parts)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def boundary_counts(self):
        """n_i = legs_i + degree_i per piece."""
        return [legs + d for (_, legs), d in zip(self.parts, self.degrees())]

    def check(self):
        degs = self.degrees()
        for (gi, legs), d in zip(self.parts, degs):
            if 2 * gi - 2 + legs + d <= 0:
                raise AssertionError(f"unstable piece in {self}")
        total = sum(2 * gi - 2 + legs + d for (gi, legs), d in zip(self.parts, degs))
        if total != 2 * self.g - 2 + self.n:
            raise AssertionError(f"Euler bookkeeping violated in {self}")
        if sum(self.boundary_counts()) != self.n + 2 * self.j:
            raise AssertionError(f"boundary count violated in {self}")
        if not _connected(len(self.parts), self.edges):
            raise AssertionError(f"disconnected multigraph in {self}")
        return True


def _connected(q, edges):
    if q == 1:
        return True
    parent = list(range(q))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        parent[ra] = rb
    root = find(0)
    return all(find(v) == root for v in range(q))


def _canonical(parts, edges):
    """Minimal (parts, edges) over vertex permutations."""
    q = len(parts)
    if q > MAX_PARTS_FOR_CANONICAL:
        raise ResourceCapError(f"canonical labeling capped at {MAX_PARTS_FOR_CANONICAL} pieces")
    best = None
    for perm in permutations(range(q)):
        # new vertex i is old vertex perm[i]
        relabel = {old: new for new, old in enumerate(perm)}
        new_parts = tuple(parts[old] for old in perm)
        new_edges = tuple(
            sorted(tuple(sorted((relabel[a], relabel[b]))) for a, b in edges)
        )
        cand = (new_parts, new_edges)
        if best is None or cand < best:
            best = cand
    return best


def enumerate_splittings(g, n, j, q_max, part_cap=200_000):
    """All isomorphism classes of connected cut multigraphs with at most
    ``q_max`` pieces for j curves on a surface of signature (g, n)."""
    if 2 * g - 2 + n <= 0:
        raise DomainError("ambient signature not hyperbolic")
    if j < 0 or q_max < 1:
        raise DomainError("need j >= 0 and Q >= 1")
    seen = set()
    out = []
    count = 0
    # a connected multigraph with j edges has at most j + 1 vertices
    for q in range(1, min(q_max, j + 1) + 1):
        genus_total2 = 2 * g - 2 + n - (n + 2 * j) + 2 * q  # = 2 * sum(g_i)
        if genus_total2 < 0 or genus_total2 % 2:
            continue
        genus_total = genus_total2 // 2
        # edge multisets over q labeled vertices
        pairs = [(a, b) for a in range(q) for b in range(a, q)]
        for edge_sel in combinations_with_replacement(pairs, j):
            if not _connected(q, edge_sel):
                continue
            deg = [0] * q
            for a, b in edge_sel:
                deg[a] += 1
                deg[b] += 1
            for legs in _compositions(n, q):
                for genera in _compositions(genus_total, q):
                    count += 1
                    if count > part_cap:
                        raise ResourceCapError("splitting enumeration cap exceeded")
                    if any(
                        2 * gi - 2 + legs[i] + deg[i] <= 0
                        for i, gi in enumerate(genera)
                    ):
                        continue
                    parts = tuple((genera[i], legs[i]) for i in range(q))
                    key = _canonical(parts, edge_sel)
                    if key in seen:
                        continue
                    seen.add(key)
                    st = SplittingType(g, n, key[0], key[1])
                    st.check()
                    out.append(st)
    return sorted(out, key=lambda s: (s.q, s.parts, s.edges))


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def orbit_upper(j, q):
    """The mapping-class orbit bound q^(2j), exact."""
    if j < 1 or q < 1:
        raise DomainError("need j, q >= 1")
    return q ** (2 * j)


def count_numbered_classes(g, n, j, part_data):
    """Exact number of cut multigraphs on *numbered* pieces with prescribed
    (g_i, n_i): the quantity bounded by q^(2j)."""
    q = len(part_data)
    target_boundary = [ni for _, ni in part_data]
    if sum(target_boundary) != n + 2 * j:
        return 0
    if sum(2 * gi - 2 + ni for gi, ni in part_data) != 2 * g - 2 + n:
        return 0
    if any(2 * gi - 2 + ni <= 0 for gi, ni in part_data):
        return 0
    pairs = [(a, b) for a in range(q) for b in range(a, q)]
    found = set()
    for edge_sel in combinations_with_replacement(pairs, j):
        deg = [0] * q
        for a, b in edge_sel:
            deg[a] += 1
            deg[b] += 1
        if any(deg[i] > target_boundary[i] for i in range(q)):
            continue  # legs_i = n_i - deg_i must be >= 0
        if not _connected(q, edge_sel):
            continue
        found.add(tuple(sorted(edge_sel)))
    return len(found)


def gluing_surjection_check(g, n, j, q, part_data):
    """Simulate every gluing sequence ((i_k, i'_k))_k in {1..q}^(2j) and
    confirm the feasible, connected outcomes hit every numbered class.

    Returns (ok, hit_classes, all_classes, n_feasible_sequences).
    """
    part_data = tuple(part_data)
    if len(part_data) != q:
        raise DomainError("part_data must have length q")
    all_classes = set()
    pairs = [(a, b) for a in range(q) for b in range(a, q)]
    for edge_sel in combinations_with_replacement(pairs, j):
        deg = [0] * q
        for a, b in edge_sel:
            deg[a] += 1
            deg[b] += 1
        if any(deg[i] > part_data[i][1] for i in range(q)):
            continue
        if not _connected(q, edge_sel):
            continue
        all_classes.add(tuple(sorted(edge_sel)))
    hit = set()
    feasible = 0
    for seq in product(range(q), repeat=2 * j):
        glue = [(seq[2 * k], seq[2 * k + 1]) for k in range(j)]
        free = [ni for _, ni in part_data]
        ok = True
        for a, b in glue:
            if a == b:
                if free[a] < 2:
                    ok = False
                    break
                free[a] -= 2
            else:
                if free[a] < 1 or free[b] < 1:
                    ok = False
                    break
                free[a] -= 1
                free[b] -= 1
        if not ok:
            continue
        edges = tuple(sorted(tuple(sorted(e)) for e in glue))
        if not _connected(q, edges):
            continue
        feasible += 1
        hit.add(edges)
    return hit == all_classes, hit, all_classes, feasible


# ----------------------------------------------------------------------
# series bounds


@dataclass(frozen=True)
class SeriesParams:
    kappa: float
    q_components: int
    beta: float

    def __post_init__(self):
        if not (0 < self.kappa < 1):
            raise DomainError("kappa must lie in (0, 1)")
        if self.q_components < 1 or self.beta <= 0:
            raise DomainError("need Q >= 1 and beta > 0")


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms_used: int
    last_ratio: float
    tail_bound: float


def _sum_series(term, j_start=1, rel_tail=1e-12, j_cap=10_000):
    """Sum term(j) for j >= j_start with a ratio-test truncation certificate.

    Stops once term(j+1)/term(j) < 1/2 and the geometric tail estimate
    drops below rel_tail * partial_sum.
    """
    total = 0.0
    prev = None
    j = j_start
    while j < j_cap:
        t = term(j)
        total += t
        if prev is not None and prev > 0:
            ratio = t / prev
            if ratio < 0.5:
                tail = t * ratio / (1.0 - ratio)
                if tail < rel_tail * max(total, 1e-300):
                    return SeriesValue(total, j - j_start + 1, ratio, tail)
        prev = t
        j += 1
    raise ResourceCapError("series did not certify truncation")


def y_moment_bound(params: SeriesParams) -> SeriesValue:
    """Upper bound for E[Y_{kappa,Q,beta}]:
    sum_j beta^j/j! Q^(2j+1) (2j)^Q I_kappa^j  (universal constant C = 1)."""
    ik = i_kappa_weight(params.kappa)
    qq = params.q_components

    def term(j):
        return (
            params.beta ** j
            / math.factorial(j)
            * qq ** (2 * j + 1)
            * (2 * j) ** qq
            * ik ** j
        )

    return _sum_series(term)


def prob_b_bound(g, kappa, q_components, universal_d=1.0) -> float:
    """Bound for P(X not in B_g^{kappa,Q}):
    (D^Q / g^(Q-1)) sum_j Q^(2j) (2j)^Q I_kappa^j / j!."""
    if g < 2:
        raise DomainError("need g >= 2")
    ik = i_kappa_weight(kappa)
    qq = q_components

    def term(j):
        return qq ** (2 * j) * (2 * j) ** qq * ik ** j / math.factorial(j)

    series = _sum_series(term)
    return universal_d ** qq / g ** (qq - 1) * series.value


def tail_bound(g, kappa, q_components, n_power) -> dict:
    """Tail sum_{j > log g} (2j)^Q (Q^2 I_kappa)^j / j!, with certificate,
    compared against g^(-N)."""
    if g < 3:
        raise DomainError("need g >= 3")
    ik = i_kappa_weight(kappa)
    qq = q_components
    x = qq * qq * ik
    j_start = math.floor(math.log(g)) + 1

    def term(j):
        return (2 * j) ** qq * x ** j / math.factorial(j)

    series = _sum_series(term, j_start=j_start)
    threshold = g ** (-float(n_power))
    return {
        "value": series.value,
        "j_start": j_start,
        "terms_used": series.terms_used,
        "tail_certificate": series.tail_bound,
        "threshold": threshold,
        "below_threshold": series.value < threshold,
    }
