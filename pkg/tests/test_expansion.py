import math

import numpy as np
import pytest

from wpkit.errors import DomainError
from wpkit.expansion import (
    fit_next_order,
    leading_expansion,
    leading_term,
    residual,
    verify_error_shape,
)

GRID = tuple(np.geomspace(0.5, 6.0, 10))


def test_leading_term_examples():
    assert abs(leading_term(1, (2.0,)) - 2 * math.sinh(1.0)) < 1e-14
    assert abs(leading_term(2, (1.0, 1.0)) - 4 * math.sinh(0.5) ** 2) < 1e-14
    assert leading_term(1, (0.0,)) == 0.0
    with pytest.raises(DomainError):
        leading_term(2, (1.0,))


def test_leading_expansion_structure():
    exp0 = leading_expansion(3)
    assert exp0.terms == {((), (0, 1, 2)): {(0, 0, 0): 8.0}}
    pts = np.random.default_rng(3).uniform(0.2, 3.0, size=(5, 3))
    for pt in pts:
        assert abs(exp0.evaluate(pt) - leading_term(3, pt)) < 1e-12 * abs(
            leading_term(3, pt)
        )
    assert exp0.parity_ok() and exp0.degree_ok()


def test_residual_examples(cache):
    got = residual((0, 3), (1.0, 1.0, 1.0), cache=cache)
    assert abs(got - abs(1.0 - 8 * math.sinh(0.5) ** 3)) < 1e-12
    assert residual((2, 1), (0.0,), cache=cache) == 0.0


def test_residual_decreasing_in_g(cache):
    vals = [residual((g, 1), (1.0,), cache=cache) for g in range(2, 13)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_verify_error_shape(cache):
    with pytest.raises(DomainError):
        verify_error_shape(1, (1.0,), range(2, 5), cache=cache)
    scan = verify_error_shape(1, (0.0,), range(2, 8), cache=cache)
    assert scan.exact_zero and scan.fitted_exponent is None
    scan = verify_error_shape(1, (1.0,), range(2, 13), cache=cache)
    assert not scan.exact_zero
    assert scan.fitted_constant > 0
    # two-window stability of the constant
    scan2 = verify_error_shape(1, (1.0,), range(2, 10), cache=cache)
    assert 0.2 < scan.fitted_constant / scan2.fitted_constant < 5.0


def test_residual_true_order_is_one_over_g(cache):
    """g * residual converges to a nonzero constant: the decay really is
    1/g even though the g = 2..12 window carries a visible transient."""
    vals = [g * residual((g, 1), (1.0,), cache=cache, signed=True)
            for g in range(6, 13)]
    drift = abs(vals[-1] - vals[0]) / abs(vals[-1])
    assert drift < 0.15
    assert abs(vals[-1]) > 1e-3


def test_fit_next_order(cache):
    fit = fit_next_order(1, GRID, range(2, 13), cache=cache)
    assert fit.post_fit_exponent <= -1.5
    assert fit.condition_number < 1e12
    assert fit.ratio_regression_r2 > 0.99
    assert fit.expansion.parity_ok()
    assert fit.expansion.degree_ok()
    with pytest.raises(DomainError):
        fit_next_order(2, GRID, range(2, 13), cache=cache)
    with pytest.raises(DomainError):
        fit_next_order(1, GRID[:4], range(2, 13), cache=cache)
