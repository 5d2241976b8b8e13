"""Random generation of uniform budget shares and log-normal inverse prices.

Streams are value types: an (seed, stream_id) pair always reproduces the same
draw sequence, independent of thread count or call site. The underlying
generator is numpy's PCG64 keyed through SeedSequence((seed, stream_id)); its
identity string is exported for run manifests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from numpy.typing import NDArray

PRNG_IDENTITY = "numpy-PCG64/SeedSequence(entropy=seed, spawn_key=(stream_id,))"

# stream_id packing: (grid point, replication, purpose) -> single 64-bit id.
_PURPOSE_BITS = 4
_REP_BITS = 20
PURPOSE_PRICES = 0
PURPOSE_SHARES = 1
PURPOSE_PARTITIONS = 2
PURPOSE_DESIGN = 3


def derive_stream_id(grid_index: int, replication: int, purpose: int = PURPOSE_SHARES) -> int:
    """Deterministic, collision-free packing of the worker coordinates."""
    if not (0 <= purpose < 2 ** _PURPOSE_BITS):
        raise ValueError(f"purpose out of range: {purpose}")
    if not (0 <= replication < 2 ** _REP_BITS):
        raise ValueError(f"replication index out of range: {replication}")
    if grid_index < 0:
        raise ValueError(f"grid index must be non-negative: {grid_index}")
    return (grid_index << (_REP_BITS + _PURPOSE_BITS)) | (replication << _PURPOSE_BITS) | purpose


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream; equal (seed, stream_id) means equal draws."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, grid_index: int, replication: int, purpose: int) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(grid_index, replication, purpose))


@dataclass(frozen=True)
class PriceDistribution:
    """Inverse normalised prices 1/r[k] ~ LogNormal(mu, sigma), i.i.d. across goods."""

    mu: float = 0.0
    sigma: float = 1.0
    kind: str = "lognormal-inverse"

    def __post_init__(self):
        if self.kind != "lognormal-inverse":
            raise ValueError(f"unknown price distribution kind: {self.kind}")
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def _as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def sample_simplex(
    K: int,
    rng: RngStream | np.random.Generator,
    size: int | tuple[int, ...] | None = None,
) -> NDArray[np.float64]:
    """Uniform draws on the (K-1)-simplex via normalised unit exponentials.

    With ``size=None`` returns one K-vector; otherwise an array of shape
    ``size + (K,)`` of independent draws.
    """
    if K < 2:
        raise ValueError(f"need K >= 2 goods, got {K}")
    gen = _as_generator(rng)
    shape = (K,) if size is None else (size if isinstance(size, tuple) else (size,)) + (K,)
    y = gen.standard_exponential(shape)
    return y / y.sum(axis=-1, keepdims=True)


def sample_prices(
    K: int,
    dist: PriceDistribution,
    rng: RngStream | np.random.Generator,
    size: int | tuple[int, ...] | None = None,
    tail_clip: float | None = None,
) -> NDArray[np.float64]:
    """Normalised prices r[k] = 1/exp(mu + sigma * z[k]) with standard-normal z.

    ``tail_clip=q`` clips the inverse prices 1/r to the [q, 1-q] quantile range
    of their log-normal law, which makes the ratio bounds (a, b) finite for
    bound certification.
    """
    gen = _as_generator(rng)
    shape = (K,) if size is None else (size if isinstance(size, tuple) else (size,)) + (K,)
    z = gen.standard_normal(shape)
    inv = np.exp(dist.mu + dist.sigma * z)
    if tail_clip is not None:
        if not (0 < tail_clip < 0.5):
            raise ValueError(f"tail_clip must be in (0, 0.5), got {tail_clip}")
        lo = lognormal_quantile(dist, tail_clip)
        hi = lognormal_quantile(dist, 1.0 - tail_clip)
        np.clip(inv, lo, hi, out=inv)
    return 1.0 / inv


def lognormal_quantile(dist: PriceDistribution, q: float) -> float:
    return math.exp(dist.mu + dist.sigma * NormalDist().inv_cdf(q))
