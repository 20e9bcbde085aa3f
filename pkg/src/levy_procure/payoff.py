"""Economic primitives: revenue multiplier, expected gain H, the field Gamma.

Demand is exponential with rate ``gamma`` and the holding cost is linear,
``c(x) = c * x``. A quadratic cost can be passed to :func:`gamma_field`
and :func:`gamma_field_y` for experiments with the general field only; no
optimal policy is provided for it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .levy_price import PriceModel, effective_delta

__all__ = [
    "MarketParams",
    "Estimate",
    "AssumptionResult",
    "AssumptionError",
    "revenue_G",
    "expected_revenue",
    "H",
    "H_prime",
    "gamma_field",
    "gamma_field_y",
    "validate",
    "require_valid",
]

Z_99 = 2.576


class AssumptionError(ValueError):
    """A hard modelling assumption fails; the theory does not apply."""

    def __init__(self, failures):
        self.failures = list(failures)
        names = ", ".join(f.name for f in self.failures)
        super().__init__(f"assumption(s) violated: {names}")


@dataclass(frozen=True)
class MarketParams:
    """Economic parameters.

    ``lam`` is the rate of the exponential demand time, ``gamma`` the rate of
    the exponential demand, ``c`` the unit holding cost per unit time, and
    ``alpha``/``alpha_p``/``alpha_s`` the premium, penalty and salvage
    factors. ``y0`` is the initial inventory.
    """

    r: float = 0.05
    lam: float = 5.0
    epsilon: float = 0.0
    gamma: float = 0.05
    c: float = 1.0
    alpha: float = 1.2
    alpha_p: float = 0.8
    alpha_s: float = 0.7
    y0: float = 0.0

    def __post_init__(self):
        for name in ("r", "lam", "gamma", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        for name in ("epsilon", "alpha_p", "y0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.alpha) and self.alpha >= 1.0):
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not (0.0 < self.alpha_s <= 1.0):
            raise ValueError(f"alpha_s must lie in (0, 1], got {self.alpha_s}")

    @property
    def beta(self) -> float:
        return self.r + self.epsilon + self.lam

    @property
    def mean_demand(self) -> float:
        return 1.0 / self.gamma

    @property
    def spread(self) -> float:
        """``alpha + alpha_p - alpha_s``."""
        return self.alpha + self.alpha_p - self.alpha_s

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int
    ci_low: float
    ci_high: float
    seed: int

    @classmethod
    def from_samples(cls, samples, seed: int) -> "Estimate":
        x = np.asarray(samples, dtype=float)
        n = x.size
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, mean - Z_99 * se, mean + Z_99 * se, seed)

    def z_score(self, target: float) -> float:
        """Deviation from ``target`` in standard errors."""
        if self.std_error == 0.0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.std_error

    def to_dict(self) -> dict:
        return asdict(self)


def revenue_G(y, d, p: MarketParams):
    """Revenue multiplier at demand time: sold, short and salvaged units."""
    y = np.asarray(y, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(y < 0) or np.any(d < 0):
        raise ValueError("inventory and demand must be nonnegative")
    out = (
        p.alpha * np.minimum(y, d)
        - p.alpha_p * np.maximum(d - y, 0.0)
        + p.alpha_s * np.maximum(y - d, 0.0)
    )
    return out if out.ndim else float(out)


def expected_revenue(y, p: MarketParams):
    """``E[G(y, D)]`` for exponential demand, in closed form."""
    y = np.asarray(y, dtype=float)
    out = p.alpha_s * y + (p.alpha - p.alpha_s) / p.gamma - p.spread * np.exp(-p.gamma * y) / p.gamma
    return out if out.ndim else float(out)


def H(y, p: MarketParams):
    y = np.asarray(y, dtype=float)
    out = p.alpha_s * y + p.alpha / p.gamma - p.spread * np.exp(-p.gamma * y) / p.gamma
    return out if out.ndim else float(out)


def H_prime(y, p: MarketParams):
    y = np.asarray(y, dtype=float)
    out = p.alpha_s + p.spread * np.exp(-p.gamma * y)
    return out if out.ndim else float(out)


def _cost(x, p, quadratic):
    return quadratic * x * x if quadratic is not None else p.c * x


def _cost_prime(x, p, quadratic):
    return 2.0 * quadratic * x if quadratic is not None else p.c + 0.0 * x


def gamma_field(t, y, price, p: MarketParams, quadratic: float | None = None):
    """Running reward ``Gamma(t, y)`` at price ``price``.

    ``quadratic``, if given, replaces the linear cost by ``quadratic * x**2``.
    """
    decay = np.exp(-p.epsilon * np.asarray(t, dtype=float))
    x = decay * np.asarray(y, dtype=float)
    out = np.exp(-(p.r + p.lam) * np.asarray(t, dtype=float)) * (
        p.lam * np.asarray(price, dtype=float) * H(x, p) - _cost(x, p, quadratic)
    )
    return out if np.ndim(out) else float(out)


def gamma_field_y(t, y, price, p: MarketParams, quadratic: float | None = None):
    """Derivative of :func:`gamma_field` in the inventory."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-p.epsilon * t)
    x = decay * np.asarray(y, dtype=float)
    out = np.exp(-(p.r + p.lam) * t) * decay * (
        p.lam * np.asarray(price, dtype=float) * H_prime(x, p) - _cost_prime(x, p, quadratic)
    )
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class AssumptionResult:
    name: str
    description: str
    value: float
    holds: bool
    hard: bool

    def to_dict(self) -> dict:
        return asdict(self)


def validate(p: MarketParams, model: PriceModel) -> list[AssumptionResult]:
    """Evaluate the standing assumptions; never raises.

    The last entry (no-invest regime) is informational: when it holds the
    optimal policy is to never buy.
    """
    delta = effective_delta(model)
    beta = p.beta
    return [
        AssumptionResult(
            "finite_discounted_price",
            "r + lambda - delta > 0",
            p.r + p.lam - delta,
            p.r + p.lam - delta > 0.0,
            True,
        ),
        AssumptionResult(
            "salvage_below_cost",
            "beta - delta - lambda*alpha_s > 0",
            beta - delta - p.lam * p.alpha_s,
            beta - delta - p.lam * p.alpha_s > 0.0,
            True,
        ),
        AssumptionResult(
            "nonnegative_spread",
            "alpha + alpha_p - alpha_s >= 0",
            p.spread,
            p.spread >= 0.0,
            True,
        ),
        AssumptionResult(
            "no_invest",
            "beta - delta >= lambda*(alpha_p + alpha) (never buy)",
            beta - delta - p.lam * (p.alpha_p + p.alpha),
            beta - delta >= p.lam * (p.alpha_p + p.alpha),
            False,
        ),
    ]


def require_valid(p: MarketParams, model: PriceModel) -> list[AssumptionResult]:
    results = validate(p, model)
    failures = [a for a in results if a.hard and not a.holds]
    if failures:
        raise AssumptionError(failures)
    return results
