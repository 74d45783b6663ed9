import itertools
import math

import numpy as np
import pytest
from pytest import approx

import oracles
from dejong.errors import ContractError, ModelError
from dejong.generators import (
    balanced_coefficients,
    homogeneous_sum,
    random_coefficients,
    symmetric_ustat,
    weighted_ustat,
)
from dejong.hoeffding import check_degenerate, normalize, rho_squared
from dejong.moments import fourth_moment
from dejong.space import Coordinate

# Centered, unit-variance three-point law: atoms -2, 0, 1 with probabilities 1/6, 1/2, 1/3.
SKEWED = Coordinate((-2.0, 0.0, 1.0), (1 / 6, 1 / 2, 1 / 3))
# Symmetric three-point law with fourth moment 2.
FLAT = Coordinate((-math.sqrt(2), 0.0, math.sqrt(2)), (0.25, 0.5, 0.25))
XY = lambda x, y: x * y  # noqa: E731


def test_homogeneous_examples():
    u = homogeneous_sum(2, 2, {(1, 2): 1})
    assert np.allclose(u.components[(1, 2)].values, [[1, -1], [-1, 1]])
    v = homogeneous_sum(4, 2, {(1, 2): 0.6, (3, 4): 0.8})
    assert v.variance() == approx(1)
    assert v.sigma2() == {(1, 2): approx(0.36), (3, 4): approx(0.64)}


def test_homogeneous_validation():
    with pytest.raises(ContractError):
        homogeneous_sum(2, 1, {(1,): 1}, Coordinate((0, 1), (0.5, 0.5)))
    with pytest.raises(ModelError):
        homogeneous_sum(3, 2, {(1,): 1})


def test_dense_random_fourth_moment():
    rng = np.random.default_rng(6)
    for n in (4, 6, 8):
        u = homogeneous_sum(n, 2, random_coefficients(n, 2, rng))
        assert u.variance() == approx(1)
        assert fourth_moment(u) == approx(oracles.fourth_moment(u), abs=1e-9)
    u = homogeneous_sum(12, 2, random_coefficients(12, 2, rng))
    assert u.variance() == approx(1)


def test_linear_fourth_moment_identity():
    # E[(sum a_j X_j)^4] = 3 + (mu_4 - 3) sum a_j^4 when sum a_j^2 = 1.
    rng = np.random.default_rng(10)
    for law in (Coordinate.rademacher(), SKEWED, FLAT):
        mu4 = law.moment(4)
        for n in (2, 3, 5):
            a = rng.standard_normal(n)
            a /= np.sqrt(np.sum(a * a))
            u = homogeneous_sum(n, 1, {(j + 1,): a[j] for j in range(n)}, law)
            expected = 3 + (mu4 - 3) * float(np.sum(a**4))
            assert fourth_moment(u) == approx(expected, abs=1e-12)
            assert oracles.fourth_moment(u) == approx(expected, abs=1e-12)


def test_symmetric_examples():
    u = symmetric_ustat(4, 2, XY)
    assert all(s == approx(1 / 6) for s in u.sigma2().values())
    assert len(u.sigma2()) == 6
    assert rho_squared(u) == approx(0.5)
    w = symmetric_ustat(2, 2, XY)
    assert len(w.components) == 1 and rho_squared(w) == approx(1)
    assert not u.meta["projected"]


@pytest.mark.parametrize("n", [4, 6, 8])
def test_symmetric_rho_is_d_over_n(n):
    for law, g in [(Coordinate.rademacher(), XY), (SKEWED, lambda x, y: x + y + x * y * (x - y) ** 2)]:
        u = symmetric_ustat(n, 2, g, law)
        assert abs(rho_squared(u) - 2 / n) <= 1e-12


def test_symmetric_projection():
    u = symmetric_ustat(4, 2, lambda x, y: x + y + x * y + 1, SKEWED)
    assert u.meta["projected"]
    assert check_degenerate(u.decomposition, 2).ok
    with pytest.raises(ModelError):
        symmetric_ustat(2, 3, XY)
    with pytest.raises(ContractError):
        symmetric_ustat(3, 2, lambda x, y: x + y)


def test_weighted_examples():
    n = 5
    ones = weighted_ustat(n, np.ones((n, n)), XY)
    sym = symmetric_ustat(n, 2, XY)
    scaled = normalize(ones)
    for J in sym.components:
        assert np.allclose(scaled.components[J].values, sym.components[J].values)
    w = np.zeros((n, n))
    w[0, 1] = w[1, 0] = 1
    assert list(weighted_ustat(n, w, XY).components) == [(1, 2)]
    star = np.zeros((n, n))
    star[0, 1:] = star[1:, 0] = 1
    u = normalize(weighted_ustat(n, star, XY))
    assert rho_squared(u) == approx(1)


def test_weighted_validation():
    with pytest.raises(ContractError):
        weighted_ustat(3, np.ones((3, 3)), lambda x, y: x + y)
    with pytest.raises(ContractError):
        weighted_ustat(3, np.ones((3, 3)), lambda x, y: x * y * (x > y) + 0.5 * x * y * (x <= y), SKEWED)
    with pytest.raises(ModelError):
        weighted_ustat(3, np.ones((2, 2)), XY)


def test_outputs_are_degenerate_and_normalize():
    rng = np.random.default_rng(1)
    outputs = [
        homogeneous_sum(5, 2, balanced_coefficients(5, 2)),
        homogeneous_sum(4, 3, random_coefficients(4, 3, rng), SKEWED),
        symmetric_ustat(5, 3, lambda x, y, z: x * y * z + x, SKEWED),
        weighted_ustat(4, np.arange(16.0).reshape(4, 4) + np.arange(16.0).reshape(4, 4).T, XY),
    ]
    for u in outputs:
        assert check_degenerate(u.decomposition, u.order).ok
        nu = normalize(u)
        assert nu.variance() == approx(1, abs=1e-10)
        again = normalize(nu)
        for J in nu.components:
            assert np.max(np.abs(again.components[J].values - nu.components[J].values)) <= 1e-12


def test_balanced_coefficients():
    a = balanced_coefficients(6, 2)
    assert len(a) == 15
    assert sum(x * x for x in a.values()) == approx(1)
    assert set(a) == set(itertools.combinations(range(1, 7), 2))
    assert math.isclose(next(iter(a.values())), 1 / math.sqrt(15))
