import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levy_procure.levy_price import (
    BLOCK_SIZE,
    Deterministic,
    GeometricBrownian,
    JumpDiffusion,
    effective_delta,
    girsanov_weight,
    laplace_exponent,
    log_steps,
    block_rng,
    n_steps_for,
    simulate_block,
    simulate_path,
    tilted_model,
)


@pytest.mark.parametrize("model", [GeometricBrownian(0.7, 0.2), JumpDiffusion(0.7, 0.2, 2, 9),
                                   Deterministic(0.3)])
def test_exponent_vanishes_at_zero(model):
    assert laplace_exponent(model, 0.0) == 0.0


def test_exponent_values(gbm, jd):
    assert laplace_exponent(gbm, 1.0) == pytest.approx(-0.66, abs=1e-14)
    assert laplace_exponent(jd, -1.0) == pytest.approx(0.95, abs=1e-14)
    assert laplace_exponent(Deterministic(0.3), 2.0) == pytest.approx(-0.6)


def test_exponent_pole(jd):
    with pytest.raises(ValueError):
        laplace_exponent(jd, -9.0)
    with pytest.raises(ValueError):
        laplace_exponent(jd, -12.0)


def test_delta(gbm, jd):
    assert effective_delta(gbm) == 0.7
    assert effective_delta(jd) == pytest.approx(0.95, abs=1e-14)
    assert effective_delta(Deterministic(0.3)) == 0.3


def test_delta_exact_for_large_sigma():
    # no cancellation when sigma**2 dwarfs mu
    assert effective_delta(GeometricBrownian(0.7, 5.0)) == 0.7


@pytest.mark.parametrize("bad", [
    lambda: GeometricBrownian(0.1, -0.2),
    lambda: JumpDiffusion(0.1, 0.2, -1.0, 9),
    lambda: JumpDiffusion(0.1, 0.2, 1.0, 1.0),
    lambda: Deterministic(math.nan),
])
def test_invalid_models(bad):
    with pytest.raises(ValueError):
        bad()


def test_deterministic_path_exact(growth):
    path = simulate_path(growth, 2.0, 0.01, rng_seed=3)
    assert path.values[0] == 1.0
    np.testing.assert_allclose(path.values, np.exp(0.7 * path.grid), rtol=1e-15)
    np.testing.assert_array_equal(path.values, np.exp(-path.log_values))


@pytest.mark.parametrize("model", [GeometricBrownian(0.7, 0.2), JumpDiffusion(0.7, 0.2, 2, 9)])
def test_path_invariants(model):
    path = simulate_path(model, 1.0, 0.01, rng_seed=11, index=700)
    assert path.values[0] == 1.0
    assert np.all(path.values > 0)
    np.testing.assert_array_equal(path.values, np.exp(-path.log_values))
    assert path.grid.size == 101 and path.dt == pytest.approx(0.01)
    # the step supremum dominates both endpoints
    assert np.all(path.step_sup >= np.maximum(path.values[:-1], path.values[1:]))
    assert path.seed == 11 and path.index == 700


def test_seed_reproducible(jd):
    a = simulate_path(jd, 1.0, 0.01, rng_seed=5, index=3)
    b = simulate_path(jd, 1.0, 0.01, rng_seed=5, index=3)
    c = simulate_path(jd, 1.0, 0.01, rng_seed=6, index=3)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.step_sup, b.step_sup)
    assert not np.array_equal(a.values, c.values)


def test_longer_horizon_extends_path(gbm):
    short = simulate_block(gbm, 100, 0.01, 1, 0)
    long = simulate_block(gbm, 200, 0.01, 1, 0)
    np.testing.assert_array_equal(short.price, long.price[:, :101])


def test_refine_subsamples_fine_path(gbm):
    coarse = simulate_block(gbm, 50, 0.02, 4, 0, refine=2)
    fine = simulate_block(gbm, 100, 0.01, 4, 0)
    np.testing.assert_allclose(coarse.price, fine.price[:, ::2], rtol=1e-13)
    np.testing.assert_allclose(coarse.step_sup,
                               np.maximum(fine.step_sup[:, ::2], fine.step_sup[:, 1::2]), rtol=1e-13)


def test_grid_errors(gbm):
    with pytest.raises(ValueError):
        simulate_path(gbm, 0.001, 0.01, 1)
    with pytest.raises(ValueError):
        simulate_path(gbm, 1.0, 0.0, 1)
    with pytest.raises(ValueError):
        n_steps_for(-1.0, 0.1)
    assert n_steps_for(4.0, 1e-3) == 4000


def test_mean_price_gbm(gbm):
    blk = [simulate_block(gbm, 100, 0.01, 17, b, with_sup=False) for b in range(196)]
    p1 = np.concatenate([x.price[:, -1] for x in blk])
    se = p1.std(ddof=1) / math.sqrt(p1.size)
    assert abs(p1.mean() - math.exp(0.7)) < 3 * se


def test_mean_price_jump_diffusion(jd):
    blk = [simulate_block(jd, 50, 0.02, 19, b, with_sup=False) for b in range(100)]
    p1 = np.concatenate([x.price[:, -1] for x in blk])
    se = p1.std(ddof=1) / math.sqrt(p1.size)
    assert abs(p1.mean() - math.exp(0.95)) < 3 * se


def test_girsanov_weight(gbm, growth):
    path = simulate_path(growth, 1.0, 0.1, 1)
    for k in range(path.grid.size):
        assert girsanov_weight(path, k, 0.7) == pytest.approx(1.0, rel=1e-14)
    path = simulate_path(gbm, 1.0, 0.1, 1)
    assert girsanov_weight(path, 0, 0.7) == 1.0
    with pytest.raises(IndexError):
        girsanov_weight(path, 11, 0.7)


def test_girsanov_weight_unit_mean(gbm):
    w = []
    for b in range(196):
        blk = simulate_block(gbm, 10, 0.1, 23, b, with_sup=False)
        w.append(np.exp(-0.7 * 1.0) * blk.price[:, -1])
    w = np.concatenate(w)
    assert abs(w.mean() - 1.0) < 3 * w.std(ddof=1) / math.sqrt(w.size)


def _bm_max_cdf(x, drift, sigma, t):
    # P(max_{s<=t} (drift s + sigma W_s) <= x), x >= 0
    from scipy.stats import norm
    s = sigma * math.sqrt(t)
    return norm.cdf((x - drift * t) / s) - math.exp(2 * drift * x / sigma**2) * norm.cdf((-x - drift * t) / s)


def test_step_supremum_law():
    # single step of length 1: the exact bridge maximum must reproduce the
    # running-maximum law of Brownian motion with drift
    from scipy.stats import kstest
    model = GeometricBrownian(0.3, 0.5)
    drift = 0.3 - 0.125
    h = np.ones(20000)
    rngs = tuple(block_rng(2, 0, s) for s in range(3))
    inc, over = log_steps(model, h, rngs)
    top = np.maximum(inc, 0.0) + over
    res = kstest(top, lambda x: np.vectorize(_bm_max_cdf)(x, drift, 0.5, 1.0))
    assert res.pvalue > 1e-3


def test_jump_step_supremum_bounds(jd):
    h = np.full(5000, 0.5)
    rngs = tuple(block_rng(3, 0, s) for s in range(3))
    inc, over = log_steps(jd, h, rngs)
    assert np.all(over >= 0)
    assert np.all(np.isfinite(over))


def test_tilted_exponent_identity(jd):
    # exponent under the price-weighted law is pi(u - 1) - delta
    for model in (GeometricBrownian(0.7, 0.2), GeometricBrownian(0.7, 5.0), jd, Deterministic(0.4)):
        t = tilted_model(model)
        d = effective_delta(model)
        for u in (-0.5, 0.3, 1.0, 2.5):
            assert laplace_exponent(t, u) == pytest.approx(laplace_exponent(model, u - 1.0) - d,
                                                           rel=1e-12, abs=1e-12)
    with pytest.raises(ValueError):
        tilted_model(JumpDiffusion(0.1, 0.2, 1.0, 1.5))


@settings(max_examples=60, deadline=None)
@given(mu=st.floats(-2, 2), sigma=st.floats(0, 3), u=st.floats(-5, 5), v=st.floats(-5, 5))
def test_exponent_convex_gbm(mu, sigma, u, v):
    m = GeometricBrownian(mu, sigma)
    mid = laplace_exponent(m, 0.5 * (u + v))
    assert mid <= 0.5 * (laplace_exponent(m, u) + laplace_exponent(m, v)) + 1e-9


def test_block_size_constant():
    assert BLOCK_SIZE == 512
