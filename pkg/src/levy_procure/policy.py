"""Explicit optimal procurement policy for linear holding cost.

The base inventory is ``ell*(P) = -(1/gamma) * log(a + b / P)`` and the
optimal cumulative purchase is the running supremum of ``ell* - y`` (floored
at zero), read strictly before the current time.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .levy_price import Deterministic, GeometricBrownian, PricePath, PriceModel
from .levy_price import effective_delta, laplace_exponent
from .payoff import MarketParams, require_valid

__all__ = [
    "RootFindingError",
    "PolicyCoefficients",
    "ProcurementPath",
    "solve_xi",
    "solve_xi_bracketed",
    "kappa",
    "coefficients",
    "base_inventory",
    "running_control",
    "optimal_control_path",
    "no_invest",
    "inventory_path",
]


class RootFindingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PolicyCoefficients:
    xi: float
    kappa: float
    a: float
    b: float
    beta: float
    delta: float
    gamma: float

    @property
    def ell_cap(self) -> float:
        """Limit of the base inventory as the price grows without bound."""
        return -math.log(self.a) / self.gamma

    def control_cap(self, y: float) -> float:
        """Upper bound ``max(ell_cap - y, 0)`` of the optimal control."""
        return max(self.ell_cap - y, 0.0)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ProcurementPath:
    grid: np.ndarray
    base_inventory: np.ndarray
    control: np.ndarray
    inventory: np.ndarray


def _monotone_price(model: PriceModel) -> bool:
    """Xt never increases, so its running supremum is identically zero."""
    if isinstance(model, Deterministic):
        return model.mu >= 0.0
    return model.sigma == 0.0 and model.mu >= 0.0


def solve_xi_bracketed(model: PriceModel, beta: float, rtol: float = 1e-14) -> float:
    """Positive root of ``laplace_exponent(model, x) = beta`` by bracketing.

    The exponent is convex with value 0 at the origin, so the root is unique.
    The upper end of the bracket is doubled until the exponent exceeds ``beta``;
    a root beyond ``1e300`` (vanishing volatility) is returned as ``inf``.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be > 0, got {beta}")
    f = lambda x: laplace_exponent(model, x) - beta  # noqa: E731
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e300:
            if _monotone_price(model):
                raise RootFindingError("Laplace exponent never reaches beta on (0, inf)")
            return math.inf
    root = brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # Newton polish; the derivative is positive at the root.
    for _ in range(3):
        eps = 1e-7 * max(root, 1.0)
        slope = (f(root + eps) - f(root - eps)) / (2 * eps)
        if not slope > 0.0:
            break
        step = f(root) / slope
        if abs(step) <= rtol * root:
            break
        root -= step
    return root


def solve_xi(model: PriceModel, beta: float) -> float:
    """Positive root ``xi`` of the Laplace exponent equation, or ``inf``.

    ``inf`` is returned for a nondecreasing price, where the drawdown is zero
    and ``kappa = 1``.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if _monotone_price(model):
        return math.inf
    if isinstance(model, Deterministic):
        return beta / -model.mu
    if isinstance(model, GeometricBrownian) and model.sigma > 0.0:
        s2 = model.sigma**2
        m = model.mu - 0.5 * s2
        # stable form of the positive quadratic root
        disc = math.sqrt(m * m + 2.0 * s2 * beta)
        if m < 0:
            return 2.0 * beta / (disc - m)
        # s2 can underflow for a vanishing sigma; the root is then unrepresentable
        return (m + disc) / s2 if s2 > 0.0 else math.inf
    if isinstance(model, GeometricBrownian):
        return beta / -model.mu
    return solve_xi_bracketed(model, beta)


def kappa(model: PriceModel, beta: float) -> float:
    """Expected ratio of the price at an independent Exponential(beta) time to
    its running maximum, ``xi / (1 + xi)``."""
    xi = solve_xi(model, beta)
    return 1.0 if math.isinf(xi) else xi / (1.0 + xi)


def coefficients(p: MarketParams, model: PriceModel) -> PolicyCoefficients:
    """Policy constants ``a``, ``b``, ``kappa`` and ``xi``.

    Raises
    ------
    ValueError
        If ``epsilon != 0`` (no closed form with deterioration) or if the
        spread ``alpha + alpha_p - alpha_s`` is zero.
    AssumptionError
        If a hard assumption fails.
    """
    if p.epsilon != 0.0:
        raise ValueError("the explicit policy requires zero deterioration (epsilon = 0)")
    require_valid(p, model)
    if not p.spread > 0.0:
        raise ValueError("alpha + alpha_p - alpha_s must be > 0 for a finite policy")
    delta = effective_delta(model)
    beta = p.beta
    xi = solve_xi(model, beta)
    k = 1.0 if math.isinf(xi) else xi / (1.0 + xi)
    a = (beta - delta - p.lam * p.alpha_s) / (p.lam * p.spread)
    b = p.c / (p.lam * k * p.spread)
    return PolicyCoefficients(xi=xi, kappa=k, a=a, b=b, beta=beta, delta=delta, gamma=p.gamma)


def base_inventory(price, coeffs: PolicyCoefficients, gamma: float):
    """``-(1/gamma) log(a + b / price)``; negative values are kept."""
    price = np.asarray(price, dtype=float)
    if np.any(price <= 0):
        raise ValueError("price must be > 0")
    out = -np.log(coeffs.a + coeffs.b / price) / gamma
    return out if out.ndim else float(out)


def running_control(ell: np.ndarray, y: float) -> np.ndarray:
    """Cumulative purchase on each step ``(t_k, t_{k+1}]`` from grid base levels.

    ``ell`` has shape ``(..., n)`` holding ``ell*`` at ``t_0 .. t_{n-1}``; the
    result ``N`` has the same shape with ``N[k] = max(0, max_{j<=k} ell[j] - y)``.
    The control at grid time ``t_k`` itself is ``N[k-1]`` (left limit).
    """
    return np.maximum(np.maximum.accumulate(ell, axis=-1) - y, 0.0)


def optimal_control_path(path: PricePath, coeffs: PolicyCoefficients, p: MarketParams,
                         y: float | None = None) -> ProcurementPath:
    """Optimal control, base inventory and inventory along one price path.

    ``control[k]`` uses base levels at indices ``0..k-1`` only, and
    ``control[0] = 0``.
    """
    if p.epsilon != 0.0:
        raise ValueError("the explicit policy requires zero deterioration (epsilon = 0)")
    y = p.y0 if y is None else y
    ell = base_inventory(path.values, coeffs, p.gamma)
    control = np.zeros_like(ell)
    if ell.size > 1:
        control[1:] = running_control(ell[:-1], y)
    return ProcurementPath(path.grid, ell, control, inventory_path(y, control, p.epsilon, path.grid))


def no_invest(p: MarketParams, delta: float) -> bool:
    """True when never purchasing is optimal."""
    return p.beta - delta >= p.lam * (p.alpha_p + p.alpha)


def inventory_path(y: float, control, epsilon: float, grid=None) -> np.ndarray:
    """``exp(-epsilon t) (y + control_t)``; ``grid`` is needed when ``epsilon > 0``."""
    control = np.asarray(control, dtype=float)
    if control.size and control[0] != 0.0:
        raise ValueError("control must start at 0")
    if np.any(np.diff(control) < 0):
        raise ValueError("control must be nondecreasing")
    if epsilon == 0.0:
        return y + control
    if grid is None:
        raise ValueError("a time grid is required when epsilon > 0")
    return np.exp(-epsilon * np.asarray(grid, dtype=float)) * (y + control)
