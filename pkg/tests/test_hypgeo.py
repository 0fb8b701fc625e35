import math
import random

import pytest

from wpkit.errors import DomainError
from wpkit.hypgeo import (
    blocks,
    canonical_class,
    census_loc_types,
    census_structural,
    cyclic_reduce,
    enumerate_conjugacy_classes,
    geodesic_length,
    inverse_word,
    is_cyclically_reduced,
    is_filling,
    j_kappa,
    j_kappa_closed,
    j_kappa_direct,
    j_kappa_limit,
    pants_from_lengths,
    reduce_word,
    seam_data,
    torus_identities,
    torus_inverse,
    verify_census,
)

# frozen by evaluating both matrix parametrizations once (regression value)
LEN_A1A2INV_UNIT_PANTS = 3.948876909031979


def test_word_reduction():
    assert reduce_word((1, -1, 2)) == (2,)
    assert cyclic_reduce((1, 2, 2, -1)) == (2, 2)
    assert is_cyclically_reduced((1, 2))
    assert not is_cyclically_reduced((1, 2, -1))
    assert inverse_word((1, -2)) == (2, -1)


def test_canonical_class_properties():
    rng = random.Random(17)
    alphabet = (1, -1, 2, -2)
    for _ in range(200):
        word = []
        while len(word) < rng.randint(1, 10):
            letter = rng.choice(alphabet)
            if word and word[-1] == -letter:
                continue
            word.append(letter)
        word = cyclic_reduce(word)
        if not word:
            continue
        canon = canonical_class(word)
        # invariance under rotation and inversion
        k = rng.randrange(len(word))
        assert canonical_class(word[k:] + word[:k]) == canon
        assert canonical_class(inverse_word(word)) == canon
        # idempotence
        assert canonical_class(canon) == canon


def test_blocks():
    assert blocks((1, 1, 2, -1, -1, 2)) == [(1, 2), (2, 1), (1, -2), (2, 1)]
    # cyclic merge of first/last runs
    assert blocks((1, 2, 2, 1)) == [(1, 2), (2, 2)]


def test_is_filling():
    assert not is_filling((1,) * 5)
    assert not is_filling((1, 2, 1, 2, 1, 2))  # (a1 a2)^3
    assert not is_filling((-2, -1, -2, -1))  # inverse boundary power
    assert is_filling((1, 2, -1, 2))
    assert is_filling((1, -2))
    with pytest.raises(DomainError):
        is_filling((1, -1))


def test_trace_identities_random_triples():
    rng = random.Random(23)
    for _ in range(25):
        b = [rng.uniform(0.1, 10.0) for _ in range(3)]
        for par in ("upper", "axes"):
            model = pants_from_lengths(*b, parametrization=par)
            for word, expect in (((1,), b[0]), ((2,), b[1]), ((1, 2), b[2])):
                got = geodesic_length(model, word)
                assert abs(got - expect) < 1e-11 * max(1.0, expect), (par, b)


def test_boundary_powers_and_inverses():
    model = pants_from_lengths(1.0, 1.3, 2.1)
    assert abs(geodesic_length(model, (1, 1)) - 2.0) < 1e-10
    assert abs(geodesic_length(model, (-1,)) - 1.0) < 1e-12
    word = (1, 2, -1, 2)
    assert abs(
        geodesic_length(model, word) - geodesic_length(model, inverse_word(word))
    ) < 1e-10


def test_conjugacy_invariance():
    model = pants_from_lengths(0.8, 1.1, 1.7)
    rng = random.Random(5)
    word = (1, -2, 1, 2)
    base = geodesic_length(model, word)
    for _ in range(10):
        conj = []
        while len(conj) < rng.randint(1, 5):
            letter = rng.choice((1, -1, 2, -2))
            if conj and conj[-1] == -letter:
                continue
            conj.append(letter)
        conjugated = cyclic_reduce(tuple(conj) + word + inverse_word(tuple(conj)))
        assert abs(geodesic_length(model, conjugated) - base) < 1e-10


def test_dual_parametrization_regression():
    for par in ("upper", "axes"):
        model = pants_from_lengths(1.0, 1.0, 1.0, parametrization=par)
        assert abs(geodesic_length(model, (1, -2)) - LEN_A1A2INV_UNIT_PANTS) < 1e-11


def test_seam_data():
    model = pants_from_lengths(0.6, 0.6, 3.0)
    t1, t2, alpha = seam_data(model)
    assert abs(t1 - 1.5) < 1e-10 and abs(t2 - 1.5) < 1e-10
    assert alpha > 0
    model = pants_from_lengths(0.4, 1.9, 2.5)
    t1, t2, _ = seam_data(model)
    assert abs((t1 + t2) - 2.5) < 1e-10
    # the foot sits closer to the longer-collar side
    assert t1 < t2  # t1 borders b1 (short), shorter minimal return path


def test_census_parameters_and_materialisation():
    census = census_loc_types(1.0, 1.0, math.e)
    assert census.M == 2 and census.k_max == 1
    # 16 sign patterns, 8 classes mod rotation+inversion, minus the
    # boundary-parallel class (a1 a2)
    assert len(census.words) == 7
    assert len(census.words) <= census.cardinality_bound == 25
    assert canonical_class((1, 2)) not in census.words
    for word in census.words:
        assert canonical_class(word) == word
        assert census.contains(word)


def test_census_membership_structural():
    census = census_structural(0.5, 2.0, 50.0)
    assert census.M == 1 + math.ceil(census.L / 0.5)
    assert census.k_max == 4
    assert census.contains((1, -2))
    assert not census.contains((1, 2))  # boundary, not filling
    deep = (1, 2, -1, 2, 1, 2, -1, 2, 1, 2)  # k = 5 > k_max
    assert blocks(deep) and not census.contains(deep)


def test_verify_census_preconditions():
    model = pants_from_lengths(0.3, 0.6, 3.0)
    with pytest.raises(DomainError):
        verify_census(model, 0.5, 2.0, 50.0, word_cap=4)
    model = pants_from_lengths(0.6, 0.6, 1.0)
    with pytest.raises(DomainError):
        verify_census(model, 0.5, 2.0, 50.0, word_cap=4)  # b3 < R


def test_verify_census_small():
    model = pants_from_lengths(0.6, 0.6, 3.0)
    report = verify_census(model, 0.5, 2.0, 20.0, word_cap=8)
    assert report.ok
    assert report.filling_found > 0
    assert not report.escapes and not report.inequality_failures


def test_enumerate_conjugacy_classes():
    classes = enumerate_conjugacy_classes(3)
    assert all(canonical_class(w) == w for w in classes)
    assert len(classes) == len(set(classes))
    # two length-1 classes: {a1, a1^-1} and {a2, a2^-1}, canonical reps are
    # the lexicographically smaller (negative) letters
    assert sorted(w for w in classes if len(w) == 1) == [(-2,), (-1,)]


def test_torus_model():
    from wpkit.hypgeo import TorusModel

    model = TorusModel(1.2, 0.7, 0.4)
    p, r = torus_identities(1.2, 0.7, 0.4)
    assert model.p == p and model.r == r
    with pytest.raises(DomainError):
        TorusModel(1.0, 0.0, 0.0)


def test_torus_identities():
    p, r = torus_identities(1.2, 0.7, 0.0)
    assert abs(r - p) < 1e-12  # theta = 0 gives r = p
    rs = [torus_identities(1.2, 0.7, t)[1] for t in (0.0, 0.3, 0.8, 1.5)]
    assert all(a < b for a, b in zip(rs, rs[1:]))
    x, theta = torus_inverse(*torus_identities(1.2, 0.7, 0.4), 0.7)
    assert abs(x - 1.2) < 1e-10 and abs(theta - 0.4) < 1e-10


def test_j_kappa_empty_domain():
    assert j_kappa_closed(1.0, 0.1) == 0.0
    assert j_kappa_direct(1.0, 0.1) == 0.0


def test_j_kappa_agreement():
    for kappa in (0.3, 1.0):
        for ell in (7.0, 12.0):
            closed, direct = j_kappa(ell, kappa)
            if closed > 0:
                assert abs(closed - direct) / closed < 1e-6


def test_j_kappa_monotone_in_kappa():
    for ell in (7.0, 10.0):
        vals = [j_kappa_closed(ell, k) for k in (0.2, 0.4, 0.8, 1.0)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_j_kappa_decay_fit():
    import numpy as np

    kappa = 0.5
    limit = j_kappa_limit(kappa)
    ells = np.linspace(8.0, 24.0, 12)
    resid = [
        abs(j_kappa_closed(l, kappa) / (16 * math.sinh(l / 2) ** 2) - limit)
        for l in ells
    ]
    slope = np.polyfit(ells, np.log(resid), 1)[0]
    assert slope <= -0.5 + 0.1
