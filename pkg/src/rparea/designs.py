"""Budget-constraint generators for the two simulated experimental designs.

The fixed design draws intercepts (inverse normalised prices) uniformly on
[a, b] and discards constraints whose intercepts all fall in the lower half
range. The adaptive (SMP) design chains budgets: each new price vector is
rescaled so the previously chosen bundle is exactly affordable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset
from .sampling import PriceDistribution, RngStream, _as_generator, sample_prices, sample_simplex

CHOI_MAX_ATTEMPTS = 10 ** 6


@dataclass(frozen=True)
class ChoiConfig:
    """Fixed design: T budgets with intercepts i.i.d. uniform on [a, b].

    ``rule`` generalises the two-good discard rule to K goods: "all" rejects a
    budget only when every intercept lies in [a, b/2] (accept iff the max
    intercept clears b/2); "any" rejects when any intercept does.
    """

    K: int
    T: int
    a: float = 10.0
    b: float = 100.0
    rule: str = "all"

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if self.K < 2 or self.T < 1:
            raise ValueError(f"need K >= 2 and T >= 1, got K={self.K}, T={self.T}")
        if self.rule not in ("all", "any"):
            raise ValueError(f"rule must be 'all' or 'any', got {self.rule!r}")


@dataclass(frozen=True)
class SmpConfig:
    """Adaptive design: chained budgets through each previously chosen bundle."""

    K: int
    T: int
    dist: PriceDistribution = PriceDistribution(0.0, 1.0)

    def __post_init__(self):
        if self.K < 2 or self.T < 1:
            raise ValueError(f"need K >= 2 and T >= 1, got K={self.K}, T={self.T}")


def choi_accept_mask(intercepts: NDArray[np.float64], half: float, rule: str = "all") -> NDArray[np.bool_]:
    """Acceptance of candidate budgets given the half-range threshold."""
    above = intercepts > half
    return above.any(axis=-1) if rule == "all" else above.all(axis=-1)


def choi_design(cfg: ChoiConfig, rng: RngStream | np.random.Generator) -> NDArray[np.float64]:
    """Draw T accepted budgets; returns normalised prices r = 1/intercepts, (T, K)."""
    gen = _as_generator(rng)
    half = cfg.b / 2.0
    accepted: list[NDArray] = []
    total = 0
    attempts = 0
    chunk = max(2 * cfg.T, 64)
    while total < cfg.T:
        cand = gen.uniform(cfg.a, cfg.b, size=(chunk, cfg.K))
        attempts += chunk
        keep = cand[choi_accept_mask(cand, half, cfg.rule)]
        if keep.size:
            accepted.append(keep)
            total += keep.shape[0]
        if attempts > CHOI_MAX_ATTEMPTS:
            raise RuntimeError(f"rejection sampling exceeded {CHOI_MAX_ATTEMPTS} attempts")
    intercepts = np.concatenate(accepted, axis=0)[:cfg.T]
    return 1.0 / intercepts


def smp_batch(
    cfg: SmpConfig,
    rng: RngStream | np.random.Generator,
    n: int,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Generate n chained datasets at once; returns (r, w) of shape (n, T, K).

    Construction guarantees r[t] . x[t-1] = 1 for every t >= 1 up to floating
    error, and every r[t] . x[t] = 1 exactly in the share representation.
    """
    gen = _as_generator(rng)
    K, T = cfg.K, cfg.T
    r = np.empty((n, T, K))
    w = np.empty((n, T, K))
    r[:, 0] = sample_prices(K, cfg.dist, gen, size=n)
    w[:, 0] = sample_simplex(K, gen, size=n)
    x_prev = w[:, 0] / r[:, 0]
    for t in range(1, T):
        raw = sample_prices(K, cfg.dist, gen, size=n)
        scale = (raw * x_prev).sum(axis=1)
        r[:, t] = raw / scale[:, None]
        w[:, t] = sample_simplex(K, gen, size=n)
        x_prev = w[:, t] / r[:, t]
    return r, w


def smp_design(cfg: SmpConfig, rng: RngStream | np.random.Generator) -> Dataset:
    """One chained dataset of prices and chosen bundles (as shares)."""
    r, w = smp_batch(cfg, rng, 1)
    return Dataset(r=r[0], w=w[0])
