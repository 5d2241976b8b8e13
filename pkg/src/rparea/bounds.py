"""Closed-form exponential bounds and the assumption checkers behind them.

Everything here is a direct formula evaluation or an exhaustive/sampled scan
over directed cycles: the Carli cycle inequality, the single-edge and
coefficient concentration bounds, the two area lower bounds built from them,
and empirical certification of the ratio-bound and dispersion assumptions on
concrete price draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import DatasetError, PriceRatioTensor
from .garp import directed_cycles, enumerate_cycles
from .sampling import RngStream, _as_generator

TELESCOPE_TOL = 1e-9
CARLI_PRODUCT_TOL = 1e-9
DEFAULT_T_CAP = 8
DEFAULT_SAMPLED_CYCLES = 10_000
DEFAULT_TAIL_CLIP = 1e-6


class BoundDomainError(DatasetError):
    """Inputs outside a bound's domain of validity."""


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the area lower bounds.

    a, b bound every price ratio; eps is the cycle-max Carli margin, eta the
    cycle-sum margin. When a dispersion margin is asserted the ratio bounds
    must straddle one (reciprocal symmetry forces a < 1 < b).
    """

    K: int
    T: int
    a: float
    b: float
    eps: float | None = None
    eta: float | None = None

    def __post_init__(self):
        if self.K < 1 or self.T < 2:
            raise BoundDomainError(f"need K >= 1 and T >= 2, got K={self.K}, T={self.T}")
        if not (0 < self.a <= self.b):
            raise BoundDomainError(f"need 0 < a <= b, got a={self.a}, b={self.b}")
        if self.eps is not None and not (self.eps > 0):
            raise BoundDomainError(f"eps must be positive when given, got {self.eps}")
        if self.eta is not None and not (self.eta > 0):
            raise BoundDomainError(f"eta must be positive when given, got {self.eta}")
        if (self.eps is not None or self.eta is not None) and not (self.a < 1 < self.b):
            raise BoundDomainError(
                f"a dispersion margin requires a < 1 < b, got a={self.a}, b={self.b}"
            )


def carli_cycle_check(rho_edges: list[NDArray[np.float64]]) -> tuple[float, float]:
    """Carli means along a telescoping cycle: (product of means, max mean).

    The edge vectors must multiply componentwise to one (telescoping); the
    product of means is then >= 1, with equality only for edgewise-constant
    ratios, and that inequality is asserted before returning.
    """
    edges = [np.asarray(e, dtype=np.float64) for e in rho_edges]
    if len(edges) < 2:
        raise BoundDomainError("a cycle needs at least two edges")
    K = edges[0].size
    if any(e.shape != (K,) for e in edges) or any(np.any(e <= 0) for e in edges):
        raise BoundDomainError("edges must be equal-length positive vectors")
    tele = np.prod(np.stack(edges), axis=0)
    if np.abs(tele - 1.0).max() > TELESCOPE_TOL:
        raise BoundDomainError(
            f"edge vectors do not telescope: componentwise product off by {np.abs(tele - 1.0).max():.3g}"
        )
    means = [float(e.mean()) for e in edges]
    product = float(np.prod(means))
    if product < 1.0 - CARLI_PRODUCT_TOL:
        raise AssertionError(f"Carli cycle inequality violated: product {product!r} < 1")
    return product, max(means)


def edge_probability_bound(carli: float, a: float, b: float, K: int, clamp: bool = True) -> float:
    """exp(-K (carli-1)^2 / (4 (b-a)^2)): edge formation against the Carli drift."""
    if not carli > 1.0:
        raise BoundDomainError(f"bound requires a Carli mean above one, got {carli}")
    if not (0 < a < b):
        raise BoundDomainError(f"need 0 < a < b, got a={a}, b={b}")
    v = math.exp(-K * (carli - 1.0) ** 2 / (4.0 * (b - a) ** 2))
    return min(max(v, 0.0), 1.0) if clamp else v


def concentration_bound(delta: float, a: float, b: float, K: int, clamp: bool = True) -> float:
    """exp(-K delta^2 / (4 (b-a+delta)^2)): one coefficient falling delta below its mean."""
    if not delta > 0:
        raise BoundDomainError(f"delta must be positive, got {delta}")
    if not (0 < a < b):
        raise BoundDomainError(f"need 0 < a < b, got a={a}, b={b}")
    v = math.exp(-K * delta ** 2 / (4.0 * (b - a + delta) ** 2))
    return min(max(v, 0.0), 1.0) if clamp else v


def theorem1_rate(params: BoundParams) -> float:
    if params.eps is None:
        raise BoundDomainError("theorem-1 bound needs the cycle-max margin eps")
    return params.eps ** 2 / (4.0 * (params.b - params.a) ** 2)


def theorem1_area_bound(params: BoundParams, clamp: bool = True) -> float:
    """1 - C_T exp(-c1 K): union bound over all directed cycles."""
    c1 = theorem1_rate(params)
    raw = 1.0 - enumerate_cycles(params.T) * math.exp(-c1 * params.K)
    return max(raw, 0.0) if clamp else raw


def theorem2_rate(params: BoundParams) -> float:
    if params.eta is None:
        raise BoundDomainError("theorem-2 bound needs the cycle-sum margin eta")
    eta0 = params.eta / (2.0 * params.T)
    return eta0 ** 2 / (4.0 * (params.b - params.a + eta0) ** 2)


def theorem2_area_bound(params: BoundParams, clamp: bool = True) -> float:
    """1 - T(T-1) exp(-c2 K): union bound over coefficient pairs of the LP."""
    c2 = theorem2_rate(params)
    raw = 1.0 - params.T * (params.T - 1) * math.exp(-c2 * params.K)
    return max(raw, 0.0) if clamp else raw


# ---------------------------------------------------------------------------
# Assumption checkers on concrete draws.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleCertificate:
    """Empirical dispersion margin plus how it was obtained."""

    value: float
    mode: str  # "exhaustive" | "sampled"
    cycles_checked: int


def _carli_of(ratios: PriceRatioTensor | NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(ratios, PriceRatioTensor):
        return ratios.carli
    arr = np.asarray(ratios, dtype=np.float64)
    if arr.ndim == 3:
        return arr.mean(axis=2)
    return arr


def check_A1(ratios: PriceRatioTensor) -> tuple[float, float]:
    """Empirical (min, max) of all off-diagonal price ratios."""
    rho = ratios.rho if isinstance(ratios, PriceRatioTensor) else np.asarray(ratios, dtype=np.float64)
    T = rho.shape[0]
    off = ~np.eye(T, dtype=bool)
    vals = rho[off]
    a_hat = float(vals.min())
    b_hat = float(vals.max())
    if not a_hat > 0:
        raise BoundDomainError("price ratios must be strictly positive")
    return a_hat, b_hat


def _cycle_margins(carli: NDArray[np.float64], cycles) -> tuple[float, float, int]:
    """(min over cycles of max edge excess, min cycle sum, count)."""
    excess = carli - 1.0
    eps_hat = math.inf
    eta_hat = math.inf
    count = 0
    for cyc in cycles:
        edges_max = -math.inf
        edges_sum = 0.0
        prev = cyc[-1]
        for v in cyc:
            x = excess[prev, v]
            if x > edges_max:
                edges_max = x
            edges_sum += x
            prev = v
        if edges_max < eps_hat:
            eps_hat = edges_max
        if edges_sum < eta_hat:
            eta_hat = edges_sum
        count += 1
    return eps_hat, eta_hat, count


def _sampled_cycles(T: int, n: int, rng: RngStream | np.random.Generator):
    gen = _as_generator(rng)
    for _ in range(n):
        L = int(gen.integers(2, T + 1))
        yield tuple(int(v) for v in gen.permutation(T)[:L])


def _resolve_cycles(T: int, T_cap: int, mode: str, n_samples: int, rng):
    if mode == "auto":
        mode = "exhaustive" if T <= T_cap else "sampled"
    if mode == "exhaustive":
        if T > T_cap:
            raise BoundDomainError(
                f"T={T} exceeds the exhaustive cap {T_cap}; rerun with mode='sampled' and an rng"
            )
        return mode, directed_cycles(T)
    if mode == "sampled":
        if rng is None:
            raise BoundDomainError("sampled-cycle mode needs an rng")
        return mode, _sampled_cycles(T, n_samples, rng)
    raise ValueError(f"unknown mode: {mode!r}")


def check_A2(
    ratios: PriceRatioTensor | NDArray[np.float64],
    T_cap: int = DEFAULT_T_CAP,
    mode: str = "auto",
    n_samples: int = DEFAULT_SAMPLED_CYCLES,
    rng: RngStream | np.random.Generator | None = None,
) -> CycleCertificate:
    """Smallest over directed cycles of (largest edge Carli mean - 1).

    A positive value certifies non-vanishing dispersion for this draw; the
    Carli inequality guarantees the value is never negative (up to float
    error). Exhaustive below T_cap, sampled above.
    """
    carli = _carli_of(ratios)
    mode, cycles = _resolve_cycles(carli.shape[0], T_cap, mode, n_samples, rng)
    eps_hat, _, count = _cycle_margins(carli, cycles)
    return CycleCertificate(value=eps_hat, mode=mode, cycles_checked=count)


def check_A2prime(
    carli: NDArray[np.float64] | PriceRatioTensor,
    T_cap: int = DEFAULT_T_CAP,
    mode: str = "auto",
    n_samples: int = DEFAULT_SAMPLED_CYCLES,
    rng: RngStream | np.random.Generator | None = None,
) -> CycleCertificate:
    """Smallest cycle sum of (Carli mean - 1) over directed cycles."""
    carli = _carli_of(carli)
    mode, cycles = _resolve_cycles(carli.shape[0], T_cap, mode, n_samples, rng)
    _, eta_hat, count = _cycle_margins(carli, cycles)
    return CycleCertificate(value=eta_hat, mode=mode, cycles_checked=count)


def certify_bounds(
    r: NDArray[np.float64],
    T_cap: int = DEFAULT_T_CAP,
    mode: str = "auto",
    n_samples: int = DEFAULT_SAMPLED_CYCLES,
    rng: RngStream | np.random.Generator | None = None,
) -> BoundParams:
    """Certify (a, b, eps, eta) on a concrete matrix of normalised prices."""
    r = np.asarray(r, dtype=np.float64)
    T, K = r.shape
    rho = r[:, None, :] / r[None, :, :]
    off = ~np.eye(T, dtype=bool)
    a_hat = float(rho[off].min())
    b_hat = float(rho[off].max())
    carli = rho.mean(axis=2)
    mode, cycles = _resolve_cycles(T, T_cap, mode, n_samples, rng)
    eps_hat, eta_hat, _ = _cycle_margins(carli, cycles)
    return BoundParams(
        K=K,
        T=T,
        a=a_hat,
        b=b_hat,
        eps=eps_hat if eps_hat > 0 else None,
        eta=eta_hat if eta_hat > 0 else None,
    )
