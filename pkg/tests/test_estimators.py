import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from levy_procure.estimators import (
    check_identities,
    decomposition_constant,
    default_horizon,
    estimate_value_direct,
    estimate_value_raw,
    estimate_value_representation,
    estimate_values,
    mc_kappa,
    newsvendor,
    newsvendor_value,
    no_trade_value,
    backward_residual,
    sweep_sigma,
    value_curve,
)
from levy_procure.levy_price import Deterministic, GeometricBrownian
from levy_procure.payoff import AssumptionError, MarketParams
from levy_procure.policy import coefficients, kappa

N = 20000
DT = 2e-3


def within(est, target, k=3.0):
    return abs(est.mean - target) <= k * est.std_error


def test_default_horizon(base, gbm):
    assert default_horizon(base, gbm) == pytest.approx(-math.log(1e-6) / 4.35)
    assert math.exp(-4.35 * 4.0) < 1e-6


def test_decomposition_constant(base, gbm):
    assert decomposition_constant(base, gbm) == pytest.approx(5 * 0.7 * 20 / 4.35)


def test_idle_direct_matches_closed_form(idle_market, idle_model):
    c = coefficients(idle_market, idle_model)
    T = default_horizon(idle_market, idle_model)
    reps, _ = value_curve(idle_market, idle_model, c, [0.0, 10.0], N, T, 1e-2, 3)
    for rep in reps:
        assert within(rep.W_hat, no_trade_value(rep.y, idle_market, idle_model))


def test_idle_representation(idle_market, idle_model):
    target = no_trade_value(10.0, idle_market, idle_model)
    rep = estimate_value_representation(idle_market, idle_model, None, 10.0, N, 4.0, 1e-2, 1)
    assert within(rep.W_hat, target)
    # under the weighted law nothing random is left when nothing is bought
    rep = estimate_value_representation(idle_market, idle_model, None, 10.0, 1000, 4.0, 1e-2, 1,
                                        measure="tilted")
    assert rep.W_hat.mean == pytest.approx(target, rel=1e-12)


def test_large_inventory_never_buys(base, gbm):
    c = coefficients(base, gbm)
    y = c.ell_cap + 0.5
    cmp = estimate_values(base, gbm, c, y, N, 4.0, DT, 5, methods=("direct", "representation"))
    target = no_trade_value(y, base, gbm)
    assert within(cmp.reports["direct"].W_hat, target)
    assert within(cmp.reports["representation"].W_hat, target)


def test_three_estimators_small(base, gbm):
    cmp = estimate_values(base, gbm, None, 0.0, N, 4.0, DT, 7)
    for d in cmp.differences.values():
        assert abs(d.mean) <= 3 * d.std_error
    direct = cmp.reports["direct"]
    # value bound at y = 0
    assert direct.W_hat.mean <= 5 * 1.2 * 20 / 4.35
    raw = cmp.reports["raw"]
    assert raw.W_hat.mean - raw.V_hat.mean == pytest.approx(decomposition_constant(base, gbm))
    assert direct.W_hat.mean - direct.V_hat.mean == pytest.approx(decomposition_constant(base, gbm))


def test_unit_mass_of_weights(base, gbm):
    from levy_procure.estimators import _run_values

    data = _run_values(base, gbm, None, [0.0], ("direct",), N, 4.0, DT, 11, 1, 1, True)
    w = data["unit_mass"]
    assert abs(w.mean() - 1.0) <= 3 * w.std(ddof=1) / math.sqrt(w.size)


def test_raw_without_purchases(base, gbm):
    rep = estimate_value_raw(base, gbm, None, 0.0, N, 4.0, DT, 13, trade=False)
    target = 5 / 4.35 * (-0.8 / 0.05)
    assert target == pytest.approx(-18.39, abs=5e-3)
    assert within(rep.V_hat, target)


def test_raw_theta_resampling(base, gbm):
    a = estimate_values(base, gbm, None, 0.0, N, 4.0, DT, 17, methods=("raw",))
    b = estimate_values(base, gbm, None, 0.0, N, 4.0, DT, 17, methods=("raw",), theta_seed=99)
    ra, rb = a.reports["raw"].V_hat, b.reports["raw"].V_hat
    assert ra.mean != rb.mean
    assert abs(ra.mean - rb.mean) <= 3 * math.hypot(ra.std_error, rb.std_error)


def test_tilted_representation_agrees(base, gbm):
    w = estimate_value_representation(base, gbm, None, 0.0, N, 4.0, DT, 19)
    t = estimate_value_representation(base, gbm, None, 0.0, N, 4.0, DT, 19, measure="tilted")
    assert abs(w.V_hat.mean - t.V_hat.mean) <= 3 * math.hypot(w.V_hat.std_error, t.V_hat.std_error)
    assert t.V_hat.std_error < w.V_hat.std_error


def test_bit_exact_and_thread_independent(base, jd):
    kw = dict(methods=("direct", "raw"))
    a = estimate_values(base, jd, None, 0.0, 1500, 1.0, 1e-2, 21, **kw)
    b = estimate_values(base, jd, None, 0.0, 1500, 1.0, 1e-2, 21, **kw)
    c = estimate_values(base, jd, None, 0.0, 1500, 1.0, 1e-2, 21, threads=3, **kw)
    assert a == b == c
    assert mc_kappa(jd, 5.05, 3000, 1e-3, 2) == mc_kappa(jd, 5.05, 3000, 1e-3, 2, threads=2)


def test_horizon_doubling_audit(base, gbm):
    for method in ("direct", "representation", "raw"):
        a = estimate_values(base, gbm, None, 0.0, 5000, 4.0, DT, 23, methods=(method,))
        b = estimate_values(base, gbm, None, 0.0, 5000, 8.0, DT, 23, methods=(method,))
        ea, eb = a.reports[method].V_hat, b.reports[method].V_hat
        assert abs(ea.mean - eb.mean) < ea.std_error


def test_step_halving_audit(base, gbm):
    # the coarse run sees the fine run's paths sub-sampled (common random numbers)
    for method in ("direct", "representation", "raw"):
        fine = estimate_values(base, gbm, None, 0.0, 5000, 4.0, 1e-3, 29, methods=(method,))
        coarse = estimate_values(base, gbm, None, 0.0, 5000, 4.0, 2e-3, 29, methods=(method,),
                                 refine=2)
        ef, ec = fine.reports[method].V_hat, coarse.reports[method].V_hat
        assert abs(ef.mean - ec.mean) < ef.std_error


def test_value_errors(base, gbm):
    with pytest.raises(ValueError):
        estimate_value_direct(base, gbm, None, -1.0, 100, 1.0, 0.1, 1)
    with pytest.raises(ValueError):
        estimate_values(base, gbm, None, 0.0, 100, 1.0, 0.1, 1, methods=("bogus",))
    with pytest.raises(ValueError):
        estimate_value_direct(MarketParams(epsilon=0.1), gbm, None, 0.0, 100, 1.0, 0.1, 1)
    with pytest.raises(AssumptionError):
        estimate_value_direct(MarketParams(alpha_s=1.0), gbm, None, 0.0, 100, 1.0, 0.1, 1)
    with pytest.raises(ValueError):
        estimate_value_direct(base, gbm, None, 0.0, 100, 0.01, 0.1, 1)
    with pytest.raises(ValueError):
        estimate_value_direct(base, gbm, None, 0.0, 1, 1.0, 0.1, 1)


def test_residual_signs(base, gbm, idle_market, idle_model):
    r0, r60 = backward_residual(base, gbm, None, [0.0, 60.0], 5000, 4.0, DT, 31)
    assert abs(r0.mean) <= 3 * r0.std_error
    assert r60.mean < -3 * r60.std_error
    single = backward_residual(base, gbm, None, 60.0, 5000, 4.0, DT, 31)
    assert single == r60
    T = default_horizon(idle_market, idle_model)
    for est in backward_residual(idle_market, idle_model, None, [0.0, 10.0, 40.0], 2000, T, 1e-2, 3):
        assert est.mean < -3 * est.std_error


def test_residual_deterministic_exact(base, growth):
    # a deterministic price leaves only quadrature error
    est = backward_residual(base, growth, None, 0.0, 600, 4.0, 1e-3, 1)
    assert est.std_error == pytest.approx(0.0, abs=1e-14)
    assert abs(est.mean) < 1e-3


def test_mc_kappa_small(gbm):
    est = mc_kappa(gbm, 5.05, 20000, 1e-3, 37)
    assert within(est, kappa(gbm, 5.05))
    assert 0 < est.mean <= 1


def test_mc_kappa_monotone_is_one(growth):
    est = mc_kappa(growth, 5.05, 2000, 1e-3, 1)
    assert est.mean == 1.0 and est.std_error == 0.0
    assert est.ci_low == est.ci_high == 1.0


def test_mc_kappa_errors(gbm):
    with pytest.raises(ValueError):
        mc_kappa(gbm, 0.0, 100, 1e-3, 1)
    with pytest.raises(ValueError):
        mc_kappa(gbm, 1.0, 100, 0.0, 1)


def test_identities_small(base, gbm):
    checks = {c.name: c for c in check_identities(gbm, base, 10000, 4.0, DT, 41)}
    assert set(checks) == {"discounted_price_integral", "discounted_price_t=0.5",
                           "discounted_price_t=1", "discounted_price_t=2", "fubini"}
    for c in checks.values():
        assert abs(c.z) <= 3
    assert checks["discounted_price_integral"].target == pytest.approx(1 / 4.35, rel=1e-6)


def test_identities_deterministic():
    p = MarketParams(lam=1.0)
    model = Deterministic(0.3)
    checks = {c.name: c for c in check_identities(model, p, 600, 30.0, 1e-2, 1)}
    integral = checks["discounted_price_integral"]
    assert integral.estimate.mean == pytest.approx(1 / (p.beta - 0.3), rel=1e-4)
    assert integral.estimate.mean == pytest.approx(integral.target, rel=1e-5)
    assert checks["discounted_price_t=1"].estimate.mean == pytest.approx(
        math.exp(-(p.beta - 0.3)), rel=1e-12)


def test_identity_time_must_be_grid_point(base, gbm):
    with pytest.raises(ValueError):
        check_identities(gbm, base, 100, 1.0, 0.3, 1)


def test_newsvendor_baseline(base, gbm):
    nv = newsvendor(base, gbm)
    assert nv.discounted_price == pytest.approx(1.149425, abs=1e-6)
    assert nv.discount == pytest.approx(0.990099, abs=1e-6)
    assert nv.eta == pytest.approx(0.73671, abs=1e-5)
    assert nv.y_star == pytest.approx(26.690, abs=1e-3)
    # demand cdf at the order equals the fractile
    assert 1 - math.exp(-base.gamma * nv.y_star) == pytest.approx(nv.eta, rel=1e-12)
    slope = nv.discounted_price * (0.7 + 1.3 * math.exp(-0.05 * nv.y_star))
    assert abs(slope - (1 + 20 * (1 - nv.discount))) < 1e-8
    assert nv.comparison is None
    assert newsvendor(base, gbm, value0=-6.8).comparison == pytest.approx(-6.8 - nv.L_star)


def test_newsvendor_numeric_max(base, jd):
    for model in (GeometricBrownian(0.7, 0.2), jd):
        nv = newsvendor(base, model)
        res = minimize_scalar(lambda y: -newsvendor_value(y, base, model), bounds=(0, 200),
                              method="bounded", options={"xatol": 1e-9})
        assert res.x == pytest.approx(nv.y_star, abs=1e-4)
        assert nv.L_star >= -res.fun - 1e-12


def test_newsvendor_zero_order(gbm):
    p = MarketParams(c=50.0)
    nv = newsvendor(p, gbm)
    assert nv.eta <= 0
    assert nv.y_star == 0.0
    assert nv.L_star == pytest.approx(nv.discounted_price * (-0.8 / 0.05))


def test_sweep_rows(base):
    rows = sweep_sigma(base, 0.7, [0.05, 1.0], 2000, 4.0, 1e-2, 3)
    assert [r.status for r in rows] == ["ok", "ok"]
    assert rows[0].L_star == rows[1].L_star
    assert rows[1].difference > rows[0].difference
    for r in rows:
        assert r.difference == pytest.approx(r.V0 - r.L_star)


def test_sweep_skips_invalid():
    rows = sweep_sigma(MarketParams(alpha_s=1.0), 0.7, [0.1, 0.2], 200, 1.0, 0.1, 1)
    assert all(r.status.startswith("skipped") for r in rows)
    assert all(math.isnan(r.V0) for r in rows)
