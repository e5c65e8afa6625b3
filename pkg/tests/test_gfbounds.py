import math
from itertools import product

import numpy as np
import pytest

from settleprob.errors import BadParams, ComposeConstantTerm
from settleprob.exactprob import prob_nonneg_margin
from settleprob.gfbounds import (
    PowerSeries,
    ascent_series,
    azuma_forkable_bound,
    azuma_relative_bound,
    bhat_series,
    convergence_radius,
    descent_series,
    forkable_tail_bound,
    lhat_series,
    mhat_series,
    relative_tail_bound,
)
from settleprob.margin import is_forkable


# -- power series plumbing ------------------------------------------------


def test_power_series_mul_reciprocal():
    a = PowerSeries([1.0, 1.0])  # 1 + Z
    inv = a.reciprocal(5)
    assert np.allclose(inv.coeffs, [1, -1, 1, -1, 1, -1])
    assert np.allclose(a.mul(inv, 5).coeffs, [1, 0, 0, 0, 0, 0])


def test_power_series_compose():
    outer = PowerSeries([0.0, 0.0, 1.0])  # Z^2
    inner = PowerSeries([0.0, 1.0, 1.0])  # Z + Z^2
    got = outer.compose(inner, 4)
    assert np.allclose(got.coeffs, [0, 0, 1, 2, 1])
    with pytest.raises(ComposeConstantTerm):
        outer.compose(PowerSeries([1.0, 1.0]))


def test_power_series_shift_eval():
    s = PowerSeries([1.0, 2.0, 3.0])
    assert np.allclose(s.shift(1).coeffs, [0, 1, 2])
    assert s.eval(2.0) == pytest.approx(1 + 4 + 12)


def test_reciprocal_requires_constant_term():
    with pytest.raises(BadParams):
        PowerSeries([0.0, 1.0]).reciprocal()


# -- stopping-time series -------------------------------------------------


def catalan(j):
    return math.comb(2 * j, j) // (j + 1)


def test_descent_series_catalan_closed_form():
    eps = 0.4
    p, q = (1 - eps) / 2, (1 + eps) / 2
    d = descent_series(eps, 41)
    for j in range(0, 20):
        want = catalan(j) * p**j * q ** (j + 1)
        assert d[2 * j + 1] == pytest.approx(want, rel=1e-12), j
        assert d[2 * j] == 0.0
    # Probability gf: descent is certain for the downward-biased walk.
    assert math.fsum(descent_series(eps, 4000).coeffs.tolist()) == pytest.approx(1.0, abs=1e-6)


def test_ascent_series_is_defective():
    eps = 0.5
    p, q = 0.25, 0.75
    total = math.fsum(ascent_series(eps, 2000).coeffs.tolist())
    assert total == pytest.approx(p / q, abs=1e-9)


def test_mhat_mass():
    eps = 0.3
    total = math.fsum(mhat_series(eps, 4000).coeffs.tolist())
    assert total == pytest.approx(1.0 - eps, abs=1e-5)


def test_lhat_bhat_are_probability_gfs():
    for eps in (0.2, 0.5, 0.8):
        n = 6000
        assert math.fsum(lhat_series(eps, n).coeffs.tolist()) == pytest.approx(1.0, abs=1e-4)
        assert math.fsum(bhat_series(eps, n).coeffs.tolist()) == pytest.approx(1.0, abs=1e-4)
        assert lhat_series(eps, 100).coeffs.min() >= 0.0
        assert bhat_series(eps, 100).coeffs.min() >= 0.0


# -- the bounds themselves ------------------------------------------------


def test_forkable_bound_dominates_exact_small_k():
    eps = 0.5
    alpha = (1 - eps) / 2
    for k in range(1, 11):
        exact = 0.0
        for bits in product((0, 1), repeat=k):
            if is_forkable(bits):
                exact += alpha ** sum(bits) * (1 - alpha) ** (k - sum(bits))
        assert forkable_tail_bound(k, eps) >= exact - 1e-12, k


def test_relative_bound_dominates_dp():
    for eps in (0.2, 0.5):
        alpha = (1 - eps) / 2
        for k in (10, 25, 50):
            assert relative_tail_bound(k, eps) >= prob_nonneg_margin(k, alpha), (eps, k)


def test_relative_bound_dominates_forkable():
    # The prefix can only help the adversary.
    for eps in (0.3, 0.6):
        for k in (5, 20, 80):
            assert relative_tail_bound(k, eps) >= forkable_tail_bound(k, eps) - 1e-15


def test_bounds_clamped_and_monotone():
    assert forkable_tail_bound(0, 0.1) == 1.0
    vals = [relative_tail_bound(k, 0.5) for k in (10, 50, 100, 200)]
    for a, b in zip(vals, vals[1:]):
        assert b < a
    assert all(0.0 < v <= 1.0 for v in vals)


def test_tail_sum_deep_decay():
    # Far below double-precision partial-sum resolution: must stay positive
    # and keep decaying geometrically.
    b1 = forkable_tail_bound(1000, 0.5)
    b2 = forkable_tail_bound(1200, 0.5)
    assert 0.0 < b2 < b1 < 1e-15


def test_decay_rate_matches_radius():
    eps = 0.5
    k1, k2 = 1500, 2000
    n = 4 * k2
    r1 = forkable_tail_bound(k1, eps, n=n)
    r2 = forkable_tail_bound(k2, eps, n=n)
    measured = -(math.log(r2) - math.log(r1)) / (k2 - k1)
    target = math.log(convergence_radius(eps))
    assert abs(measured - target) / target < 0.10


def test_convergence_radius_values():
    assert convergence_radius(0.5) > 1.0
    with pytest.raises(BadParams):
        convergence_radius(0.0)
    with pytest.raises(BadParams):
        convergence_radius(1.0)
    # Radius approaches 1 as the bias vanishes.
    assert convergence_radius(0.01) == pytest.approx(1.0, abs=1e-3)


def test_azuma_bounds():
    assert azuma_forkable_bound(0, 0.5) == 1.0
    assert azuma_relative_bound(0, 0.5) == 1.0
    k = 100_000
    eps = 0.5
    assert azuma_forkable_bound(k, eps) == pytest.approx(
        math.exp(-2 * eps**4 * k / (1 + 35 * eps)), rel=1e-12
    )
    assert azuma_relative_bound(k, eps) == pytest.approx(
        3 * math.exp(-k * eps**4 / (64 + 35 * eps)), rel=1e-12
    )
    # The gf bound beats the closed form at moderate k.
    assert relative_tail_bound(400, 0.5) < azuma_relative_bound(400, 0.5)
    with pytest.raises(BadParams):
        azuma_forkable_bound(-1, 0.5)
