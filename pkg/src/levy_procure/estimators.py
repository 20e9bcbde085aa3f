"""Monte Carlo engines for the optimal procurement problem.

All value estimators run on one shared path ensemble (common random
numbers). Time integrals use the exact conditional mean of the discount
over each step: on ``(t_k, t_{k+1}]`` the control is constant and

    E[int e^{-beta t} P_t dt | F_{t_k}] = e^{-beta t_k} P_k (1 - e^{-(beta-delta) dt}) / (beta - delta),

so replacing the path integral by this weight leaves the expectation
unchanged. Past the horizon the control is frozen and the remaining
integral is added in closed form, which makes every estimator unbiased for
the (grid-monitored) policy whatever the horizon.

Paths are processed in blocks of :data:`~levy_procure.levy_price.BLOCK_SIZE`
and combined in block order, so results do not depend on ``threads``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .levy_price import (
    BLOCK_SIZE,
    _AUX,
    _BRIDGE,
    _DIFFUSION,
    _JUMPS,
    Deterministic,
    PriceModel,
    block_rng,
    effective_delta,
    log_steps,
    n_steps_for,
    simulate_block,
    tilted_model,
)
from .payoff import Estimate, MarketParams, expected_revenue, require_valid, revenue_G
from .policy import PolicyCoefficients, coefficients

__all__ = [
    "METHODS",
    "ValueReport",
    "ValueComparison",
    "IdentityCheck",
    "NewsvendorReport",
    "SweepRow",
    "default_horizon",
    "decomposition_constant",
    "no_trade_value",
    "estimate_value_direct",
    "estimate_value_representation",
    "estimate_value_raw",
    "estimate_values",
    "value_curve",
    "backward_residual",
    "mc_kappa",
    "check_identities",
    "newsvendor",
    "newsvendor_value",
    "sweep_sigma",
]

METHODS = ("direct", "representation", "raw")


@dataclass(frozen=True)
class ValueReport:
    W_hat: Estimate
    V_hat: Estimate
    method: str
    y: float

    def to_dict(self) -> dict:
        return {"method": self.method, "y": self.y,
                "W_hat": self.W_hat.to_dict(), "V_hat": self.V_hat.to_dict()}


@dataclass(frozen=True)
class ValueComparison:
    """Estimates from several methods on common paths.

    ``differences[(m1, m2)]`` estimates ``V_m1 - V_m2`` from per-path
    differences, so its standard error accounts for the correlation.
    """

    reports: dict
    differences: dict

    def to_dict(self) -> dict:
        return {
            "reports": {m: r.to_dict() for m, r in self.reports.items()},
            "differences": {f"{a}-{b}": d.to_dict() for (a, b), d in self.differences.items()},
        }


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    estimate: Estimate
    target: float
    z: float

    def to_dict(self) -> dict:
        return {"name": self.name, "target": self.target, "z": self.z,
                "estimate": self.estimate.to_dict()}


@dataclass(frozen=True)
class NewsvendorReport:
    eta: float
    y_star: float
    L_star: float
    comparison: float | None = None
    discounted_price: float = math.nan
    discount: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    V0: float
    L_star: float
    difference: float
    std_error: float
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# helpers


def default_horizon(p: MarketParams, model: PriceModel, tol: float = 1e-6) -> float:
    """Smallest horizon with ``exp(-(beta - delta) T) <= tol``.

    Beyond the horizon the estimators freeze the control and add the
    remaining integral exactly, so this only bounds the effect of freezing.
    """
    rate = p.beta - effective_delta(model)
    if not rate > 0.0:
        raise ValueError("discounted price does not decay; no finite horizon")
    return -math.log(tol) / rate


def decomposition_constant(p: MarketParams, model: PriceModel) -> float:
    """``lambda * alpha_s * E[D] / (r + lambda - delta)``, the gap ``W - V``."""
    return p.lam * p.alpha_s / (p.gamma * (p.r + p.lam - effective_delta(model)))


def no_trade_value(y, p: MarketParams, model: PriceModel):
    """``W(y)`` when nothing is ever bought: ``lam H(y)/(r+lam-delta) - c y/(r+lam)``."""
    from .payoff import H

    delta = effective_delta(model)
    y = np.asarray(y, dtype=float)
    out = p.lam * H(y, p) / (p.r + p.lam - delta) - p.c * y / (p.r + p.lam)
    return out if out.ndim else float(out)


def _map_blocks(n_paths: int, fn: Callable[[int], dict], threads: int) -> dict:
    """Run ``fn`` on every block and concatenate along the last axis, in order."""
    if n_paths < 2:
        raise ValueError("need at least 2 paths")
    n_blocks = -(-n_paths // BLOCK_SIZE)

    def work(b):
        out = fn(b)
        take = min(BLOCK_SIZE, n_paths - b * BLOCK_SIZE)
        return {k: v[..., :take] for k, v in out.items()}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(n_blocks)))
    else:
        parts = [work(b) for b in range(n_blocks)]
    return {k: np.concatenate([part[k] for part in parts], axis=-1) for k in parts[0]}


def _setup(p: MarketParams, model: PriceModel, coeffs: PolicyCoefficients | None):
    if p.epsilon != 0.0:
        raise ValueError("the Monte Carlo engines require epsilon = 0")
    require_valid(p, model)
    return coeffs if coeffs is not None else coefficients(p, model)


def _weights(beta: float, bd: float, dt: float):
    return -math.expm1(-bd * dt) / bd, -math.expm1(-beta * dt) / beta


def _as_list(y) -> tuple[list[float], bool]:
    if np.ndim(y) == 0:
        return [float(y)], True
    return [float(v) for v in y], False


# ---------------------------------------------------------------------------
# values


def _value_block(b, *, p, model, coeffs, ys, methods, n, dt, seed, refine, trade, measure,
                 theta_seed):
    blk = simulate_block(model, n, dt, seed, b, with_sup=False, refine=refine)
    P = blk.price
    t = blk.grid
    beta, delta = p.beta, coeffs.delta
    bd = beta - delta
    wP, wB = _weights(beta, bd, dt)
    disc = np.exp(-beta * t)
    dP = P * disc
    dPk = dP[:, :-1]
    dP_T = dP[:, -1]
    lam, gam, k = p.lam, p.gamma, p.spread

    if trade:
        runmax = np.maximum.accumulate(-np.log(coeffs.a + coeffs.b / P[:, :-1]) / gam, axis=1)
    out = {}
    I1 = dPk.sum(axis=1) * wP + dP_T / bd
    out["unit_mass"] = bd * I1

    tilt = None
    if "representation" in methods and measure == "tilted":
        # same random numbers, price simulated under the weighted measure
        Pt = simulate_block(tilted_model(model), n, dt, seed, b, with_sup=False,
                            refine=refine).price[:, :-1]
        et = np.exp(-bd * t)
        tilt_max = None
        if trade:
            tilt_max = np.maximum.accumulate(-np.log(coeffs.a + coeffs.b / Pt) / gam, axis=1)
        tilt = (et, tilt_max)

    raw_draws = None
    if "raw" in methods:
        aux = block_rng(seed if theta_seed is None else theta_seed, b, _AUX)
        theta = aux.exponential(1.0 / lam, BLOCK_SIZE)
        demand = aux.exponential(1.0 / gam, BLOCK_SIZE)
        idx = np.minimum(np.floor(theta / dt).astype(np.int64), n)
        h = theta - t[idx]
        # fresh increment from the last grid point to the demand time
        inc, _ = log_steps(model, np.maximum(h, 1e-300), (aux, aux, aux), with_sup=False)
        rows = np.arange(BLOCK_SIZE)
        P_theta = P[rows, idx] * np.exp(inc)
        raw_draws = (theta, demand, idx, h, rows, P_theta)

    res = {m: np.empty((len(ys), BLOCK_SIZE)) for m in methods}
    for i, y in enumerate(ys):
        if trade:
            N = np.maximum(runmax - y, 0.0)
        else:
            N = np.zeros_like(dPk)
        Y = y + N
        Y_T = Y[:, -1]
        eY = np.exp(-gam * Y)
        eY_T = eY[:, -1]
        A = (dPk * eY).sum(axis=1) * wP + dP_T * eY_T / bd
        Bv = (dPk * Y).sum(axis=1) * wP + dP_T * Y_T / bd
        C = Y @ disc[:-1] * wB + disc[-1] * Y_T / beta
        dN = np.diff(N, axis=1, prepend=0.0)
        if "direct" in methods:
            purchases = (dPk * dN).sum(axis=1)
            res["direct"][i] = (lam * p.alpha_s * Bv + lam * p.alpha / gam * I1
                                - lam * k / gam * A - p.c * C - purchases)
        if "representation" in methods:
            if tilt is not None:
                et, tilt_max = tilt
                Yt = y + (np.maximum(tilt_max - y, 0.0) if trade else 0.0 * Pt)
                A = (np.exp(-gam * Yt) @ et[:-1]) * wP + et[-1] * np.exp(-gam * Yt[:, -1]) / bd
                Bv = (Yt @ et[:-1]) * wP + et[-1] * Yt[:, -1] / bd
            res["representation"][i] = (y + lam * p.alpha / (gam * bd) - lam * k / gam * A
                                        + (lam * p.alpha_s - bd) * Bv - p.c * C)
        if "raw" in methods:
            theta, demand, idx, h, rows, P_theta = raw_draws
            r = p.r
            Yext = np.concatenate([Y, Y[:, -1:]], axis=1)
            er = np.exp(-r * t)
            wr = -math.expm1(-r * dt) / r
            hold = np.zeros((BLOCK_SIZE, n + 1))
            np.cumsum(Yext[:, :-1] * (er[:-1] * wr), axis=1, out=hold[:, 1:])
            Y_theta = Yext[rows, idx]
            holding = hold[rows, idx] + er[idx] * Y_theta * (-np.expm1(-r * h) / r)
            bought = np.cumsum(P[:, :-1] * er[:-1] * dN, axis=1)
            paid = bought[rows, np.minimum(idx, n - 1)]
            sale = np.exp(-r * theta) * P_theta * revenue_G(Y_theta, demand, p)
            res["raw"][i] = sale - p.c * holding - paid
    for m in methods:
        out[m] = res[m]
    return out


def _run_values(p, model, coeffs, ys, methods, n_paths, horizon, dt, seed, threads,
                refine, trade, measure="weighted", theta_seed=None):
    coeffs = _setup(p, model, coeffs)
    if measure not in ("weighted", "tilted"):
        raise ValueError(f"measure must be 'weighted' or 'tilted', got {measure!r}")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    for y in ys:
        if not (math.isfinite(y) and y >= 0.0):
            raise ValueError(f"inventory must be finite and >= 0, got {y}")
    n = n_steps_for(horizon, dt)
    fn = lambda b: _value_block(  # noqa: E731
        b, p=p, model=model, coeffs=coeffs, ys=ys, methods=tuple(methods), n=n, dt=dt,
        seed=seed, refine=refine, trade=trade, measure=measure, theta_seed=theta_seed)
    return _map_blocks(n_paths, fn, threads)


def _report(samples, method, y, const, seed) -> ValueReport:
    est = Estimate.from_samples(samples, seed)
    if method == "raw":
        V = est
        W = Estimate(est.mean + const, est.std_error, est.n,
                     est.ci_low + const, est.ci_high + const, seed)
    else:
        W = est
        V = Estimate(est.mean - const, est.std_error, est.n,
                     est.ci_low - const, est.ci_high - const, seed)
    return ValueReport(W, V, method, y)


def estimate_values(p: MarketParams, model: PriceModel, coeffs: PolicyCoefficients | None,
                    y: float, n_paths: int, horizon: float, dt: float, seed: int, *,
                    methods: Sequence[str] = METHODS, threads: int = 1, refine: int = 1,
                    trade: bool = True, measure: str = "weighted",
                    theta_seed: int | None = None) -> ValueComparison:
    """Value of the optimal policy at inventory ``y`` by several methods.

    ``trade=False`` evaluates the never-buy policy instead. ``measure``
    selects how the representation estimator handles the price-weighted
    expectations: ``"weighted"`` multiplies by the discounted price on the
    common paths, ``"tilted"`` simulates the price directly under the
    weighted law (same random numbers). The tilted form keeps a finite
    variance when ``sigma**2`` exceeds about ``2 (beta - delta)``.
    ``theta_seed`` redraws the demand times and demands of the raw
    estimator while keeping the price paths.
    """
    methods = tuple(dict.fromkeys(methods))
    data = _run_values(p, model, coeffs, [float(y)], methods, n_paths, horizon, dt, seed,
                       threads, refine, trade, measure, theta_seed)
    const = decomposition_constant(p, model)
    v = {m: data[m][0] - (0.0 if m == "raw" else const) for m in methods}
    reports = {m: _report(data[m][0], m, float(y), const, seed) for m in methods}
    diffs = {(a, b): Estimate.from_samples(v[a] - v[b], seed) for a, b in combinations(methods, 2)}
    return ValueComparison(reports, diffs)


def _single(method):
    def estimator(p: MarketParams, model: PriceModel, coeffs: PolicyCoefficients | None,
                  y: float, n_paths: int, horizon: float, dt: float, seed: int, *,
                  threads: int = 1, refine: int = 1, trade: bool = True,
                  **kw) -> ValueReport:
        cmp = estimate_values(p, model, coeffs, y, n_paths, horizon, dt, seed,
                              methods=(method,), threads=threads, refine=refine, trade=trade,
                              **kw)
        return cmp.reports[method]

    estimator.__name__ = f"estimate_value_{method}"
    return estimator


estimate_value_direct = _single("direct")
estimate_value_direct.__doc__ = """Value by integrating the running reward along each path.

Per path: the time integral of ``Gamma(t, y + control_t)`` minus the
discounted purchase cost. ``V_hat`` subtracts the analytic decomposition
constant.
"""

estimate_value_representation = _single("representation")
estimate_value_representation.__doc__ = """Value through the probabilistic representation.

Expectations under the price-weighted measure at an Exponential(beta - delta)
time are computed as ``E[int (beta-delta) e^{-beta t} P_t f(Y_t) dt]``; the
plain expectation at the Exponential(beta) time as ``E[int beta e^{-beta t} Y_t dt]``.
Pass ``measure="tilted"`` to simulate the weighted expectations under the
weighted law instead (see :func:`estimate_values`).
"""

estimate_value_raw = _single("raw")
estimate_value_raw.__doc__ = """Value by sampling the demand time and the demand.

Per path a demand time ``Theta ~ Exp(lam)`` and demand ``D ~ Exp(gamma)``
are drawn and the realised discounted profit is returned, so ``V_hat`` is
direct and ``W_hat`` adds the decomposition constant.
"""


def value_curve(p: MarketParams, model: PriceModel, coeffs: PolicyCoefficients | None,
                ys: Sequence[float], n_paths: int, horizon: float, dt: float, seed: int, *,
                method: str = "direct", threads: int = 1) -> tuple[list[ValueReport], np.ndarray]:
    """Values at several inventories on common paths.

    Returns the reports and the per-path ``W`` samples (shape ``(len(ys), n_paths)``)
    for paired comparisons.
    """
    ys = [float(v) for v in ys]
    data = _run_values(p, model, coeffs, ys, (method,), n_paths, horizon, dt, seed,
                       threads, 1, True)
    const = decomposition_constant(p, model)
    samples = data[method]
    if method == "raw":
        samples = samples + const
    reports = [_report(data[method][i], method, y, const, seed) for i, y in enumerate(ys)]
    return reports, samples


# ---------------------------------------------------------------------------
# first-order condition


def _residual_block(b, *, p, model, coeffs, ys, n, dt, seed, refine):
    blk = simulate_block(model, n, dt, seed, b, with_sup=True, refine=refine)
    P = blk.price
    t = blk.grid
    beta, bd = p.beta, p.beta - coeffs.delta
    wP, wB = _weights(beta, bd, dt)
    disc = np.exp(-beta * t)
    dP = P * disc
    # continuous running supremum of the price at each grid time
    S = np.empty_like(P)
    S[:, 0] = P[:, 0]
    S[:, 1:] = blk.step_sup
    np.maximum.accumulate(S, axis=1, out=S)
    # exp(-gamma * ell*(S)) = a + b / S
    eL = coeffs.a + coeffs.b / S
    lam, k = p.lam, p.spread
    cost = p.c * (disc[:-1].sum() * wB + disc[-1] / beta)
    out = np.empty((len(ys), BLOCK_SIZE))
    for i, y in enumerate(ys):
        g = np.minimum(math.exp(-p.gamma * y), eL)
        gk = 0.5 * (g[:, :-1] + g[:, 1:])
        mass = (dP[:, :-1] * (lam * p.alpha_s + lam * k * gk)).sum(axis=1) * wP
        tail = dP[:, -1] * (lam * p.alpha_s + lam * k * g[:, -1]) / bd
        out[i] = mass + tail - cost - P[:, 0]
    return {"res": out}


def backward_residual(p: MarketParams, model: PriceModel, coeffs: PolicyCoefficients | None,
                      y_probe, n_paths: int, horizon: float, dt: float, seed: int, *,
                      threads: int = 1, refine: int = 1):
    """Marginal value of one extra unit at time 0 under the optimal policy.

    Estimates ``E[int Gamma_y(t, max(y, sup_{u<=t} ell*_u)) dt] - P_0``. It is
    zero for ``y <= ell*_0`` and negative above. The running supremum is
    monitored continuously (exact bridge maxima within steps).

    ``y_probe`` may be a scalar (returns one :class:`Estimate`) or a sequence
    (returns a list, on common paths).
    """
    coeffs = _setup(p, model, coeffs)
    ys, scalar = _as_list(y_probe)
    n = n_steps_for(horizon, dt)
    fn = lambda b: _residual_block(  # noqa: E731
        b, p=p, model=model, coeffs=coeffs, ys=ys, n=n, dt=dt, seed=seed, refine=refine)
    res = _map_blocks(n_paths, fn, threads)["res"]
    ests = [Estimate.from_samples(res[i], seed) for i in range(len(ys))]
    return ests[0] if scalar else ests


# ---------------------------------------------------------------------------
# kappa


def _kappa_block(b, *, model, beta, dt, seed):
    tau = block_rng(seed, b, _AUX).exponential(1.0 / beta, BLOCK_SIZE)
    m = np.maximum(np.ceil(tau / dt - 1e-12).astype(np.int64), 1)
    starts = np.concatenate([[0], np.cumsum(m)[:-1]])
    h = np.full(int(m.sum()), dt)
    h[starts + m - 1] = tau - (m - 1) * dt
    rngs = tuple(block_rng(seed, b, s) for s in (_DIFFUSION, _JUMPS, _BRIDGE))
    inc, over = log_steps(model, h, rngs, with_sup=True)
    after = np.cumsum(inc)
    base = np.repeat(after[starts] - inc[starts], m)
    after = after - base
    before = np.concatenate([[0.0], after[:-1]])
    before[starts] = 0.0
    top = np.maximum.reduceat(np.maximum(before, after) + over, starts)
    end = after[starts + m - 1]
    return {"d": np.exp(end - np.maximum(top, 0.0))}


def mc_kappa(model: PriceModel, beta: float, n_paths: int, dt: float, seed: int, *,
             threads: int = 1) -> Estimate:
    """Mean of ``inf_{u <= tau} P_tau / P_u`` for ``tau ~ Exp(beta)``.

    The path is simulated on steps of ``dt`` up to ``tau`` with exact maxima
    within each step, so the only error is Monte Carlo noise.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    fn = lambda b: _kappa_block(b, model=model, beta=beta, dt=dt, seed=seed)  # noqa: E731
    return Estimate.from_samples(_map_blocks(n_paths, fn, threads)["d"], seed)


# ---------------------------------------------------------------------------
# identities


def _identity_block(b, *, p, model, coeffs, times, n, dt, seed):
    blk = simulate_block(model, n, dt, seed, b, with_sup=False)
    P = blk.price
    t = blk.grid
    dP = P * np.exp(-p.beta * t)
    seg = 0.5 * dt * (dP[:, :-1] + dP[:, 1:])
    out = {"integral": seg.sum(axis=1)}
    for j, ti in enumerate(times):
        out[f"t{j}"] = dP[:, int(round(ti / dt))]
    ell = -np.log(coeffs.a + coeffs.b / P[:, :-1]) / p.gamma
    N = np.maximum(np.maximum.accumulate(ell, axis=1) - p.y0, 0.0)
    dN = np.diff(N, axis=1, prepend=0.0)
    out["fubini_lhs"] = (seg * N).sum(axis=1)
    out["fubini_rhs"] = (dP[:, :-1] * dN).sum(axis=1) / (p.beta - coeffs.delta)
    return out


def check_identities(model: PriceModel, p: MarketParams, n_paths: int, horizon: float,
                     dt: float, seed: int, *, times: Sequence[float] = (0.5, 1.0, 2.0),
                     threads: int = 1) -> list[IdentityCheck]:
    """Check three consequences of the price dynamics by simulation.

    * ``E[int e^{-beta t} P_t dt] = 1/(beta - delta)``;
    * ``E[e^{-beta t} P_t] = e^{-(beta - delta) t}`` at each of ``times``;
    * ``E[int e^{-beta t} P_t nu_t dt] = E[int e^{-beta t} P_t d nu_t]/(beta - delta)``
      for the optimal control from ``p.y0``.

    Integrals use the trapezoid rule on ``[0, horizon]``, independently of the
    step weights used by the value estimators. The last check is reported on
    per-path differences (target 0).
    """
    coeffs = _setup(p, model, None)
    n = n_steps_for(horizon, dt)
    for ti in times:
        k = round(ti / dt)
        if abs(k * dt - ti) > 1e-9 * max(1.0, ti) or not 0 <= k <= n:
            raise ValueError(f"check time {ti} is not a grid point of [0, {n * dt}]")
    fn = lambda b: _identity_block(  # noqa: E731
        b, p=p, model=model, coeffs=coeffs, times=tuple(times), n=n, dt=dt, seed=seed)
    data = _map_blocks(n_paths, fn, threads)
    bd = p.beta - coeffs.delta

    def check(name, samples, target):
        est = Estimate.from_samples(samples, seed)
        return IdentityCheck(name, est, target, est.z_score(target))

    out = [check("discounted_price_integral", data["integral"], -math.expm1(-bd * n * dt) / bd)]
    for j, ti in enumerate(times):
        out.append(check(f"discounted_price_t={ti:g}", data[f"t{j}"], math.exp(-bd * ti)))
    out.append(check("fubini", data["fubini_lhs"] - data["fubini_rhs"], 0.0))
    return out


# ---------------------------------------------------------------------------
# newsvendor


def _newsvendor_parts(p: MarketParams, model: PriceModel):
    if p.epsilon != 0.0:
        raise ValueError("the newsvendor benchmark requires epsilon = 0")
    require_valid(p, model)
    delta = effective_delta(model)
    ep = p.lam / (p.r + p.lam - delta)
    e0 = p.lam / (p.r + p.lam)
    unit = 1.0 + (p.c / p.r) * (1.0 - e0)
    return ep, e0, unit


def newsvendor_value(y, p: MarketParams, model: PriceModel):
    """One-shot value ``L(y)`` of ordering ``y`` at time 0 and never again."""
    ep, _, unit = _newsvendor_parts(p, model)
    y = np.asarray(y, dtype=float)
    out = ep * expected_revenue(y, p) - unit * y
    return out if out.ndim else float(out)


def newsvendor(p: MarketParams, model: PriceModel, value0: float | None = None) -> NewsvendorReport:
    """Optimal single order at time 0.

    ``eta`` is the critical fractile of the demand distribution and
    ``y_star = max(0, -log(1 - eta)/gamma)``. If ``value0`` (an estimate of
    the dynamic value at zero inventory) is given, ``comparison`` holds
    ``value0 - L(y_star)``.
    """
    ep, e0, unit = _newsvendor_parts(p, model)
    eta = ((p.alpha + p.alpha_p) * ep - unit) / (p.spread * ep)
    if eta >= 1.0:
        raise ValueError(f"critical fractile {eta} >= 1; salvage exceeds the unit cost")
    y_star = 0.0 if eta <= 0.0 else -math.log1p(-eta) / p.gamma
    L_star = newsvendor_value(y_star, p, model)
    comparison = None if value0 is None else value0 - L_star
    return NewsvendorReport(eta, y_star, L_star, comparison, ep, e0)


# ---------------------------------------------------------------------------
# sigma sweep


def sweep_sigma(p: MarketParams, gbm_mu: float, sigma_grid: Sequence[float], n_paths: int,
                horizon: float, dt: float, seed: int, *, threads: int = 1) -> list[SweepRow]:
    """Dynamic value ``V(0)`` against the newsvendor value across volatilities.

    The same seed is used for every ``sigma``, so the rows share their
    Gaussian draws. ``V(0)`` comes from the representation estimator with
    the price-weighted terms simulated under the weighted law, whose
    variance stays finite at large ``sigma``. Rows whose parameters violate
    an assumption are kept with ``status`` set and NaN values.
    """
    from .levy_price import GeometricBrownian
    from .payoff import AssumptionError

    rows = []
    for sigma in sigma_grid:
        model = GeometricBrownian(gbm_mu, float(sigma))
        try:
            coeffs = coefficients(p, model)
        except (AssumptionError, ValueError) as exc:
            rows.append(SweepRow(float(sigma), math.nan, math.nan, math.nan, math.nan,
                                 f"skipped: {exc}"))
            continue
        rep = estimate_value_representation(p, model, coeffs, 0.0, n_paths, horizon, dt, seed,
                                            threads=threads, measure="tilted")
        nv = newsvendor(p, model, rep.V_hat.mean)
        rows.append(SweepRow(float(sigma), rep.V_hat.mean, nv.L_star, nv.comparison,
                             rep.V_hat.std_error))
    return rows
