"""Optimal procurement of a storable commodity under exponential Levy prices."""

__version__ = "0.1.0"

from .estimators import (
    NewsvendorReport,
    ValueReport,
    backward_residual,
    check_identities,
    estimate_value_direct,
    estimate_value_raw,
    estimate_value_representation,
    estimate_values,
    mc_kappa,
    newsvendor,
    sweep_sigma,
)
from .levy_price import (
    Deterministic,
    GeometricBrownian,
    JumpDiffusion,
    PricePath,
    effective_delta,
    laplace_exponent,
    simulate_path,
)
from .payoff import (
    AssumptionError,
    Estimate,
    H,
    H_prime,
    MarketParams,
    expected_revenue,
    gamma_field,
    gamma_field_y,
    revenue_G,
    validate,
)
from .policy import (
    PolicyCoefficients,
    RootFindingError,
    base_inventory,
    coefficients,
    inventory_path,
    kappa,
    no_invest,
    optimal_control_path,
    solve_xi,
)

__all__ = [
    "AssumptionError", "Deterministic", "Estimate", "GeometricBrownian", "H", "H_prime",
    "JumpDiffusion", "MarketParams", "NewsvendorReport", "PolicyCoefficients", "PricePath",
    "RootFindingError", "ValueReport", "backward_residual", "base_inventory",
    "check_identities", "coefficients", "effective_delta", "estimate_value_direct",
    "estimate_value_raw", "estimate_value_representation", "estimate_values",
    "expected_revenue", "gamma_field", "gamma_field_y", "inventory_path", "kappa",
    "laplace_exponent", "mc_kappa", "newsvendor", "no_invest", "optimal_control_path",
    "revenue_G", "simulate_path", "solve_xi", "sweep_sigma", "validate",
]
