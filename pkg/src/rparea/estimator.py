"""Monte Carlo estimation of the rational-choice area.

One replication fixes a set of normalised prices, then repeatedly draws
budget-share profiles and records whether the implied dataset passes the
consistency test (GARP cycle check, LP feasibility, or a separability
variant). Replications use disjoint, addressable random streams so results
are identical for any worker count; adaptive stopping ends a replication once
the Wilson interval is tight enough.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .afriat import AfriatSystem, additive_feasible_arrays, solve_afriat
from .dataset import PartitionSpec
from .designs import ChoiConfig, SmpConfig, choi_design, smp_batch
from .garp import (
    TOL_EDGE_FILE,
    TOL_EDGE_MC,
    batch_garp_satisfied,
    batch_garp_satisfied_strict,
    batch_has_cycle,
)
from .sampling import (
    PURPOSE_DESIGN,
    PURPOSE_PARTITIONS,
    PURPOSE_PRICES,
    PURPOSE_SHARES,
    PriceDistribution,
    RngStream,
    sample_prices,
    sample_simplex,
)

MODES = ("garp", "lp", "separability-weak", "separability-additive")


@dataclass(frozen=True)
class EstimatorConfig:
    """Draw budget, replication structure, and reproducibility knobs."""

    max_draws: int = 10_000
    replications: int = 20
    ci_level: float = 0.95
    target_halfwidth: float | None = 0.005
    seed: int = 0
    threads: int = 1
    batch_size: int = 1_000

    def __post_init__(self):
        if self.max_draws < 100:
            raise ValueError(f"max_draws must be at least 100, got {self.max_draws}")
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications}")
        if not (0 < self.ci_level < 1):
            raise ValueError(f"ci_level must be in (0, 1), got {self.ci_level}")
        if self.target_halfwidth is not None and not (self.target_halfwidth > 0):
            raise ValueError(f"target_halfwidth must be positive, got {self.target_halfwidth}")
        if self.threads < 1 or self.batch_size < 1:
            raise ValueError("threads and batch_size must be positive")

    @property
    def z(self) -> float:
        return NormalDist().inv_cdf(0.5 + self.ci_level / 2.0)


@dataclass(frozen=True)
class AreaEstimate:
    """Point estimate with its confidence interval and replication accounting."""

    mean: float
    ci_lo: float
    ci_hi: float
    per_replication: tuple[tuple[float, int], ...]
    mode: str

    @property
    def draws(self) -> int:
        return sum(n for _, n in self.per_replication)

    @property
    def replications(self) -> int:
        return len(self.per_replication)


def wilson_halfwidth(successes: int, n: int, z: float) -> float:
    if n == 0:
        return math.inf
    p = successes / n
    z2 = z * z
    return z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n)


def wilson_interval(successes: int, n: int, z: float) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    z2 = z * z
    center = (p + z2 / (2 * n)) / (1 + z2 / n)
    hw = wilson_halfwidth(successes, n, z)
    return max(0.0, center - hw), min(1.0, center + hw)


def _aggregate(results: Sequence[tuple[float, int, int]], cfg: EstimatorConfig, mode: str) -> AreaEstimate:
    """Combine per-replication (estimate, successes, draws) into one estimate.

    The interval is a normal interval across replication means; a single
    replication falls back to the Wilson interval of its pooled counts.
    """
    means = np.array([est for est, _, _ in results])
    mean = float(means.mean())
    if len(results) >= 2:
        sd = float(means.std(ddof=1))
        hw = cfg.z * sd / math.sqrt(len(results))
        lo, hi = mean - hw, mean + hw
    else:
        lo, hi = wilson_interval(results[0][1], results[0][2], cfg.z)
    return AreaEstimate(
        mean=mean,
        ci_lo=max(0.0, min(lo, mean)),
        ci_hi=min(1.0, max(hi, mean)),
        per_replication=tuple((est, n) for est, _, n in results),
        mode=mode,
    )


def _run_replications(cfg: EstimatorConfig, rep_fn: Callable[[int], tuple[float, int, int]]):
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(rep_fn, range(cfg.replications)))
    return [rep_fn(i) for i in range(cfg.replications)]


# ---------------------------------------------------------------------------
# Indicators over batches of share draws at fixed prices.
# ---------------------------------------------------------------------------

def _expenditures(r: NDArray, W: NDArray) -> tuple[NDArray, NDArray]:
    """E[d, i, j] = r_i . x_j for each draw d, plus the quantity stack x."""
    x = W / r[None, :, :]
    return np.einsum("ik,djk->dij", r, x), x


def garp_indicator(r: NDArray, W: NDArray, tol_edge: float = TOL_EDGE_MC) -> NDArray[np.bool_]:
    """Fast-path GARP indicator; exact when ties e == 1 have measure zero."""
    E, _ = _expenditures(r, W)
    return batch_garp_satisfied(E, tol_edge)


def garp_indicator_exact(r: NDArray, W: NDArray, tol_edge: float = TOL_EDGE_FILE) -> NDArray[np.bool_]:
    """Tie-aware GARP indicator for degenerate price sets (identical budgets etc.)."""
    E, _ = _expenditures(r, W)
    return batch_garp_satisfied_strict(E, tol_edge)


def lp_indicator(r: NDArray, W: NDArray, tol_lp: float = 1e-8) -> NDArray[np.bool_]:
    E, _ = _expenditures(r, W)
    out = np.empty(E.shape[0], dtype=bool)
    for d in range(E.shape[0]):
        e = E[d].copy()
        np.fill_diagonal(e, 1.0)
        out[d] = solve_afriat(AfriatSystem(e=e), tol_lp=tol_lp).feasible
    return out


def weak_separability_indicator(
    r: NDArray,
    W: NDArray,
    groups: tuple[tuple[int, ...], ...],
    tol_edge: float = TOL_EDGE_MC,
) -> NDArray[np.bool_]:
    """Necessary conditions: GARP on the full data and within every group.

    The within-group relation compares group expenditure on another bundle
    against own group spending: edge i -> j iff r_i^g . x_j^g <= r_i^g . x_i^g.
    """
    E, x = _expenditures(r, W)
    ok = batch_garp_satisfied(E, tol_edge)
    T = r.shape[0]
    idx = np.arange(T)
    for g in groups:
        cols = list(g)
        Eg = np.einsum("ik,djk->dij", r[:, cols], x[:, :, cols])
        mg = W[:, :, cols].sum(axis=2)
        adj = Eg <= mg[:, :, None] + tol_edge
        adj[:, idx, idx] = False
        ok &= ~batch_has_cycle(adj)
    return ok


def additive_separability_indicator(
    r: NDArray,
    W: NDArray,
    groups: tuple[tuple[int, ...], ...],
    tol_edge: float = TOL_EDGE_MC,
    tol_lp: float = 1e-8,
    gate: bool = True,
    scaling: str = "group-normalised",
) -> NDArray[np.bool_]:
    """Additive-separability feasibility per draw.

    Additive rationalisability implies the weak necessary conditions, so with
    ``gate=True`` the LP only runs on draws that pass them (this also keeps
    the indicator nested inside the weak one for either gap scaling);
    ``gate=False`` solves the LP on every draw.
    """
    _, x = _expenditures(r, W)
    if gate:
        ok = weak_separability_indicator(r, W, groups, tol_edge)
        todo = np.flatnonzero(ok)
    else:
        ok = np.empty(W.shape[0], dtype=bool)
        todo = np.arange(W.shape[0])
    for d in todo:
        ok[d] = additive_feasible_arrays(r, x[d], groups, tol_lp, scaling=scaling).feasible
    return ok


# ---------------------------------------------------------------------------
# Estimators.
# ---------------------------------------------------------------------------

def _bernoulli_loop(
    indicator: Callable[[NDArray], NDArray[np.bool_]],
    gen: np.random.Generator,
    K: int,
    T: int,
    cfg: EstimatorConfig,
) -> tuple[int, int]:
    succ = 0
    n = 0
    z = cfg.z
    while n < cfg.max_draws:
        b = min(cfg.batch_size, cfg.max_draws - n)
        W = sample_simplex(K, gen, size=(b, T))
        succ += int(indicator(W).sum())
        n += b
        if cfg.target_halfwidth is not None and wilson_halfwidth(succ, n, z) <= cfg.target_halfwidth:
            break
    return succ, n


def _trivial_estimate(cfg: EstimatorConfig, mode: str) -> AreaEstimate:
    per = tuple((1.0, 0) for _ in range(cfg.replications))
    return AreaEstimate(mean=1.0, ci_lo=1.0, ci_hi=1.0, per_replication=per, mode=mode)


def estimate_area(
    K: int,
    T: int,
    dist: PriceDistribution,
    cfg: EstimatorConfig,
    mode: str = "garp",
    grid_index: int = 0,
) -> AreaEstimate:
    """Area for random prices: replications over price draws, shares inside."""
    if mode not in ("garp", "lp"):
        raise ValueError(f"mode must be 'garp' or 'lp', got {mode!r}")
    if T == 1:
        return _trivial_estimate(cfg, mode)
    root = RngStream(cfg.seed)

    def one_rep(rep: int) -> tuple[float, int, int]:
        r = sample_prices(K, dist, root.child(grid_index, rep, PURPOSE_PRICES), size=T)
        gen = root.child(grid_index, rep, PURPOSE_SHARES).generator()
        if mode == "garp":
            ind = lambda W: garp_indicator(r, W)
        else:
            ind = lambda W: lp_indicator(r, W)
        succ, n = _bernoulli_loop(ind, gen, K, T, cfg)
        return succ / n, succ, n

    return _aggregate(_run_replications(cfg, one_rep), cfg, mode)


def estimate_area_fixed_prices(
    prices: NDArray[np.float64],
    cfg: EstimatorConfig,
    mode: str = "garp",
    tol_edge: float = TOL_EDGE_FILE,
    grid_index: int = 0,
) -> AreaEstimate:
    """Area of the test induced by one fixed set of budgets.

    Fixed budgets may be degenerate (identical, parallel, chained), so the
    tie-aware indicator is used with the file-data edge tolerance.
    """
    r = np.asarray(prices, dtype=np.float64)
    if r.ndim != 2:
        raise ValueError(f"prices must be a T x K matrix, got shape {r.shape}")
    T, K = r.shape
    if mode not in ("garp", "lp"):
        raise ValueError(f"mode must be 'garp' or 'lp', got {mode!r}")
    if T == 1:
        return _trivial_estimate(cfg, mode)
    root = RngStream(cfg.seed)

    def one_rep(rep: int) -> tuple[float, int, int]:
        gen = root.child(grid_index, rep, PURPOSE_SHARES).generator()
        if mode == "garp":
            ind = lambda W: garp_indicator_exact(r, W, tol_edge)
        else:
            ind = lambda W: lp_indicator(r, W)
        succ, n = _bernoulli_loop(ind, gen, K, T, cfg)
        return succ / n, succ, n

    return _aggregate(_run_replications(cfg, one_rep), cfg, mode)


def area_curve(
    K_grid: Sequence[int],
    T: int,
    dist: PriceDistribution,
    cfg: EstimatorConfig,
    mode: str = "garp",
) -> list[tuple[int, AreaEstimate]]:
    """One estimate per K on a shared seed discipline (grid index = position)."""
    return [
        (int(K), estimate_area(int(K), T, dist, cfg, mode=mode, grid_index=gi))
        for gi, K in enumerate(K_grid)
    ]


def estimate_separability_area(
    K: int,
    T: int,
    dist: PriceDistribution,
    kind: str,
    cfg: EstimatorConfig,
    group_size: int | None = None,
    partition: PartitionSpec | None = None,
    n_partitions: int = 100,
    grid_index: int = 0,
    scaling: str = "group-normalised",
) -> AreaEstimate:
    """Area under a separability restriction.

    ``kind`` is "weak-necessary" (GARP overall and within each group; an upper
    bound on the true weakly separable area) or "additive" (the grouped linear
    system with the given gap ``scaling``). With no fixed ``partition``, each
    price replication averages over ``n_partitions`` random equal partitions
    of ``group_size`` redrawn per replication.
    """
    if kind not in ("weak-necessary", "additive"):
        raise ValueError(f"kind must be 'weak-necessary' or 'additive', got {kind!r}")
    if partition is None:
        if group_size is None:
            raise ValueError("need either a fixed partition or a group_size")
        if K % group_size != 0:
            raise ValueError(f"group size {group_size} does not divide K={K}")
    else:
        partition.validate_covering(K)
        n_partitions = 1
    if T == 1:
        return _trivial_estimate(cfg, "separability-weak" if kind == "weak-necessary" else "separability-additive")
    mode = "separability-weak" if kind == "weak-necessary" else "separability-additive"
    root = RngStream(cfg.seed)

    def one_rep(rep: int) -> tuple[float, int, int]:
        r = sample_prices(K, dist, root.child(grid_index, rep, PURPOSE_PRICES), size=T)
        gen = root.child(grid_index, rep, PURPOSE_SHARES).generator()
        if partition is not None:
            partitions = [partition]
        else:
            pgen = root.child(grid_index, rep, PURPOSE_PARTITIONS).generator()
            partitions = [
                PartitionSpec.equal_groups(K, group_size, perm=pgen.permutation(K))
                for _ in range(n_partitions)
            ]
        total_succ = 0
        total_n = 0
        part_means = []
        for spec in partitions:
            if kind == "weak-necessary":
                ind = lambda W: weak_separability_indicator(r, W, spec.groups)
            else:
                ind = lambda W: additive_separability_indicator(r, W, spec.groups, scaling=scaling)
            succ, n = _bernoulli_loop(ind, gen, K, T, cfg)
            total_succ += succ
            total_n += n
            part_means.append(succ / n)
        return float(np.mean(part_means)), total_succ, total_n

    return _aggregate(_run_replications(cfg, one_rep), cfg, mode)


def estimate_design_area(design: ChoiConfig | SmpConfig, cfg: EstimatorConfig) -> AreaEstimate:
    """Area of the test induced by an experimental design.

    Each replication draws one budget set from the design, then estimates its
    area over fresh uniform shares. For the adaptive (SMP) design the budget
    sequence is generated by chaining through a uniform random chooser; the
    area measured is that of the resulting budget sequence as a test, so the
    scoring shares are drawn fresh rather than reusing the chaining choices.
    SMP budgets can be degenerate (coinciding budgets as dispersion vanishes),
    so their indicator is tie-aware.
    """
    root = RngStream(cfg.seed)
    if isinstance(design, ChoiConfig):
        if design.T == 1:
            return _trivial_estimate(cfg, "garp")

        def one_rep(rep: int) -> tuple[float, int, int]:
            r = choi_design(design, root.child(0, rep, PURPOSE_PRICES))
            gen = root.child(0, rep, PURPOSE_SHARES).generator()
            succ, n = _bernoulli_loop(lambda W: garp_indicator(r, W), gen, design.K, design.T, cfg)
            return succ / n, succ, n

    elif isinstance(design, SmpConfig):
        if design.T == 1:
            return _trivial_estimate(cfg, "garp")

        def one_rep(rep: int) -> tuple[float, int, int]:
            r, _ = smp_batch(design, root.child(0, rep, PURPOSE_DESIGN), 1)
            r = r[0]
            gen = root.child(0, rep, PURPOSE_SHARES).generator()
            succ, n = _bernoulli_loop(lambda W: garp_indicator_exact(r, W), gen, design.K, design.T, cfg)
            return succ / n, succ, n

    else:
        raise TypeError(f"design must be ChoiConfig or SmpConfig, got {type(design).__name__}")

    return _aggregate(_run_replications(cfg, one_rep), cfg, "garp")


def with_seed(cfg: EstimatorConfig, seed: int) -> EstimatorConfig:
    return replace(cfg, seed=seed)
