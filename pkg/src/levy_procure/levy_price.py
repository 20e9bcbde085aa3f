"""Exponential Levy spot prices.

The price is written as ``P_t = exp(-Xt_t)`` where ``Xt`` is a Levy process
with no positive jumps. Three families are supported: geometric Brownian
motion, an exponential jump-diffusion with exponentially distributed
(upward) log-price jumps, and deterministic growth.

Simulation is exact in distribution at the grid points. In addition every
step carries an exact draw of the supremum of ``P`` over that step
(Brownian-bridge maximum between jump epochs), so running suprema are not
biased by grid monitoring.

Random numbers come from Philox4x32-10 (counter-based). Paths are grouped
into blocks of :data:`BLOCK_SIZE`; block ``j`` of seed ``s`` uses the
streams ``SeedSequence(s, spawn_key=(j, stream))``. Path ``i`` is therefore
a pure function of ``(s, i)``, whatever the number of worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "BLOCK_SIZE",
    "GeometricBrownian",
    "JumpDiffusion",
    "Deterministic",
    "PriceModel",
    "PricePath",
    "PathBlock",
    "laplace_exponent",
    "effective_delta",
    "simulate_path",
    "simulate_block",
    "girsanov_weight",
    "tilted_model",
    "block_rng",
]

BLOCK_SIZE = 512

# stream ids inside a block
_DIFFUSION, _JUMPS, _BRIDGE, _AUX = 0, 1, 2, 3


@dataclass(frozen=True)
class GeometricBrownian:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class JumpDiffusion:
    """Log-price jumps ``Z ~ Exponential(ell)`` arriving at rate ``psi``."""

    mu: float
    sigma: float
    psi: float
    ell: float

    def __post_init__(self):
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not (self.psi >= 0.0 and math.isfinite(self.psi)):
            raise ValueError(f"psi must be finite and >= 0, got {self.psi}")
        if not self.ell > 1.0:
            raise ValueError(f"ell must be > 1 for a finite mean price, got {self.ell}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class Deterministic:
    mu: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


PriceModel = Union[GeometricBrownian, JumpDiffusion, Deterministic]


def _diffusion_parts(model: PriceModel) -> tuple[float, float]:
    """(drift of log P, volatility) of the continuous part."""
    if isinstance(model, Deterministic):
        return model.mu, 0.0
    return model.mu - 0.5 * model.sigma**2, model.sigma


def laplace_exponent(model: PriceModel, u: float) -> float:
    """Laplace exponent ``log E[exp(u * Xt_1)]`` of ``Xt = -log P``.

    Raises
    ------
    ValueError
        For a jump-diffusion when ``u <= -ell`` (the exponential moment of the
        jumps diverges there).
    """
    if isinstance(model, Deterministic):
        return -model.mu * u
    # (s^2/2) u (u + 1): exact at u = -1; s is applied to each factor so a
    # tiny volatility does not underflow before meeting a huge u
    s = model.sigma
    diffusion = 0.5 * (s * u) * (s * (u + 1.0))
    if isinstance(model, GeometricBrownian):
        return diffusion - model.mu * u
    if u <= -model.ell:
        raise ValueError(f"Laplace exponent undefined for u={u} <= -ell={-model.ell}")
    return diffusion - u * (model.mu + model.psi / (model.ell + u))


def effective_delta(model: PriceModel) -> float:
    """Growth rate of the mean price, ``E[P_t] = exp(delta t)``.

    Always evaluated as the Laplace exponent at -1, never taken from input.
    """
    return laplace_exponent(model, -1.0)


@dataclass(frozen=True)
class PricePath:
    """One simulated price trajectory on a uniform grid.

    ``step_sup[k]`` is the supremum of the price over ``[t_k, t_{k+1}]``.
    """

    grid: np.ndarray
    values: np.ndarray
    log_values: np.ndarray
    step_sup: np.ndarray
    seed: int
    index: int = 0

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0])


@dataclass(frozen=True)
class PathBlock:
    """A block of paths, rows are paths. ``log_price = log P = -Xt``."""

    grid: np.ndarray
    log_price: np.ndarray
    price: np.ndarray
    step_sup: np.ndarray | None
    seed: int
    block: int

    @property
    def n_paths(self) -> int:
        return self.price.shape[0]


def block_rng(seed: int, block: int, stream: int) -> np.random.Generator:
    """Philox generator for ``(seed, block, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def _bridge_overshoot(inc, var, uniforms):
    """Exact draw of ``max(bridge) - max(0, inc)`` for a Brownian bridge from 0
    to ``inc`` with total variance ``var``.

    The bridge maximum is ``(inc + sqrt(inc**2 + q)) / 2`` with
    ``q = -2 var log U``; the overshoot is written in cancellation-free form.
    """
    q = -2.0 * var * np.log1p(-uniforms)
    a = np.abs(inc)
    den = np.sqrt(a * a + q) + a
    # den == 0 only for empty segments, whose overshoot is 0
    return 0.5 * q / np.where(den > 0.0, den, 1.0)


def log_steps(model: PriceModel, h: np.ndarray, rngs, with_sup: bool = True):
    """Draw log-price increments over steps of lengths ``h``.

    Parameters
    ----------
    model : PriceModel
    h : ndarray
        Step lengths (any shape, all > 0).
    rngs : tuple of Generator
        ``(diffusion, jumps, bridge)`` streams.
    with_sup : bool
        Whether to also return the within-step maximum of the log price.

    Returns
    -------
    inc : ndarray
    overshoot : ndarray or None
        Within-step maximum of the log price minus the larger of its two
        endpoint values (>= 0; exactly 0 for monotone steps).
    """
    diff_rng, jump_rng, bridge_rng = rngs
    h = np.asarray(h, dtype=float)
    drift, sigma = _diffusion_parts(model)

    if sigma > 0.0:
        inc = drift * h + sigma * np.sqrt(h) * diff_rng.standard_normal(h.shape)
    else:
        inc = drift * h

    jump_idx = None
    if isinstance(model, JumpDiffusion) and model.psi > 0.0:
        counts = jump_rng.poisson(model.psi * h)
        jump_idx = np.flatnonzero(counts)
        if jump_idx.size:
            flat_h = h.reshape(-1)[jump_idx]
            k = counts.reshape(-1)[jump_idx]
            j_inc, j_over = _jump_steps(model, flat_h, k, jump_rng, drift, sigma)
            inc = np.array(inc, dtype=float, copy=True)
            inc.reshape(-1)[jump_idx] = j_inc

    if not with_sup:
        return inc, None

    if sigma > 0.0:
        over = _bridge_overshoot(inc, sigma * sigma * h, bridge_rng.random(h.shape))
    else:
        over = np.zeros(h.shape)
    if jump_idx is not None and jump_idx.size:
        over.reshape(-1)[jump_idx] = j_over
    return inc, over


def _jump_steps(model, h, counts, rng, drift, sigma):
    """Exact increments and overshoots for steps that contain at least one jump.

    The continuous part is re-drawn piecewise between the (uniform) jump
    epochs; each piece gets its own bridge maximum.
    """
    m = h.size
    kmax = int(counts.max())
    epochs = rng.random((m, kmax))
    epochs[np.arange(kmax)[None, :] >= counts[:, None]] = 1.0
    epochs.sort(axis=1)
    bounds = np.concatenate([np.zeros((m, 1)), epochs, np.ones((m, 1))], axis=1)

    level = np.zeros(m)
    best = np.zeros(m)
    for j in range(kmax + 1):
        hh = (bounds[:, j + 1] - bounds[:, j]) * h
        z = rng.standard_normal(m)
        u = rng.random(m)
        if sigma > 0.0:
            seg = drift * hh + sigma * np.sqrt(hh) * z
            seg_max = np.maximum(seg, 0.0) + _bridge_overshoot(seg, sigma * sigma * hh, u)
        else:
            seg = drift * hh
            seg_max = np.maximum(seg, 0.0)
        best = np.maximum(best, level + seg_max)
        level = level + seg
        if j < kmax:
            jump = rng.exponential(1.0 / model.ell, m) * (j < counts)
            level = level + jump
            best = np.maximum(best, level)
    return level, best - np.maximum(level, 0.0)


def simulate_block(
    model: PriceModel,
    n_steps: int,
    dt: float,
    seed: int,
    block: int,
    with_sup: bool = True,
    refine: int = 1,
) -> PathBlock:
    """Simulate block ``block`` (``BLOCK_SIZE`` paths) of seed ``seed``.

    Random numbers are drawn step-major, so extending ``n_steps`` leaves the
    earlier steps unchanged for continuous models. With ``refine > 1`` the
    paths are simulated with step ``dt / refine`` and sub-sampled onto the
    ``dt`` grid; this gives common random numbers across step sizes.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    grid = np.arange(n_steps + 1) * dt
    n_fine = n_steps * refine
    h_fine = dt / refine

    if isinstance(model, Deterministic):
        log_price = np.broadcast_to(model.mu * grid, (BLOCK_SIZE, n_steps + 1)).copy()
        step_sup = None
        if with_sup:
            step_sup = np.exp(np.maximum(log_price[:, :-1], log_price[:, 1:]))
        price = np.exp(log_price)
        return PathBlock(grid, log_price, price, step_sup, seed, block)

    rngs = tuple(block_rng(seed, block, s) for s in (_DIFFUSION, _JUMPS, _BRIDGE))
    h = np.full((n_fine, BLOCK_SIZE), h_fine)
    inc, over = log_steps(model, h, rngs, with_sup=with_sup)
    fine_log = np.zeros((BLOCK_SIZE, n_fine + 1))
    np.cumsum(inc.T, axis=1, out=fine_log[:, 1:])

    log_price = fine_log[:, ::refine]
    step_sup = None
    if with_sup:
        fine_sup = np.maximum(fine_log[:, :-1], fine_log[:, 1:]) + over.T
        if refine > 1:
            fine_sup = fine_sup.reshape(BLOCK_SIZE, n_steps, refine).max(axis=2)
        step_sup = np.exp(fine_sup)
    log_price = np.ascontiguousarray(log_price)
    price = np.exp(log_price)
    return PathBlock(grid, log_price, price, step_sup, seed, block)


def n_steps_for(horizon: float, dt: float) -> int:
    if not (dt > 0.0 and horizon > 0.0):
        raise ValueError(f"horizon and dt must be > 0 (horizon={horizon}, dt={dt})")
    if horizon < dt * (1.0 - 1e-12):
        raise ValueError(f"horizon {horizon} shorter than one step dt={dt}")
    return max(1, int(math.ceil(horizon / dt - 1e-9)))


def simulate_path(
    model: PriceModel, horizon: float, dt: float, rng_seed: int, index: int = 0
) -> PricePath:
    """Simulate path ``index`` of seed ``rng_seed`` on ``[0, horizon]``."""
    if index < 0:
        raise ValueError("path index must be >= 0")
    n = n_steps_for(horizon, dt)
    blk = simulate_block(model, n, dt, rng_seed, index // BLOCK_SIZE)
    row = index % BLOCK_SIZE
    log_values = -blk.log_price[row].copy()
    values = np.exp(-log_values)
    return PricePath(
        grid=blk.grid.copy(),
        values=values,
        log_values=log_values,
        step_sup=blk.step_sup[row].copy(),
        seed=rng_seed,
        index=index,
    )


def tilted_model(model: PriceModel) -> PriceModel:
    """The price law under the measure with density ``exp(-delta t) P_t``.

    GBM keeps its volatility and gains ``sigma**2`` of drift; for the
    jump-diffusion the jump rate becomes ``psi * ell / (ell - 1)`` and the
    jump law ``Exponential(ell - 1)``.

    Raises
    ------
    ValueError
        For a jump-diffusion with ``ell <= 2`` (the tilted jumps would have
        no finite mean, which this module does not represent).
    """
    if isinstance(model, Deterministic):
        return model
    if isinstance(model, GeometricBrownian):
        return GeometricBrownian(model.mu + model.sigma**2, model.sigma)
    if not model.ell > 2.0:
        raise ValueError(f"tilted simulation needs ell > 2, got {model.ell}")
    return JumpDiffusion(
        model.mu + model.sigma**2,
        model.sigma,
        model.psi * model.ell / (model.ell - 1.0),
        model.ell - 1.0,
    )


def girsanov_weight(path: PricePath, index: int, delta: float) -> float:
    """Density ``exp(-delta t_k) P_{t_k}`` of the tilted measure at grid index ``index``."""
    if not 0 <= index < path.grid.size:
        raise IndexError(f"grid index {index} out of range")
    return float(np.exp(-delta * path.grid[index]) * path.values[index])
