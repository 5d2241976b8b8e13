"""Core data types: budget datasets, price-ratio tensors, and the deterministic
transformations among prices, budget shares, quantities and Carli indices.

A dataset stores income-normalised prices r (T x K, each row scaled so the
chosen bundle costs exactly 1) and budget shares w (T x K, rows on the unit
simplex). Quantities are derived on demand via x = w / r.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

# Explicit tolerances; no operation uses a silent default.
ROW_SUM_TOL = 1e-12          # shares must sum to 1 this tightly
ROW_SUM_RENORM_TOL = 1e-9    # worse than ROW_SUM_TOL but within this: renormalise + warn
DIAG_TOL = 1e-12             # unit diagonal of the expenditure matrix
RECIPROCAL_TOL = 1e-12       # rho[i][j][k] * rho[j][i][k] == 1
BUDGET_TOL = 1e-12           # r . x == 1 after shares_to_quantities


class DatasetError(ValueError):
    """Raised when inputs violate a dataset invariant."""


class DatasetFormatError(DatasetError):
    """Raised by the loaders; carries a line/field diagnostic."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{message}" + (f" ({', '.join(where)})" if where else ""))


def _freeze(a: NDArray) -> NDArray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """T observations of K goods: normalised prices ``r`` and budget shares ``w``.

    Invariants enforced at construction: r strictly positive, each w row
    non-negative and summing to one within ``ROW_SUM_TOL`` (rows off by at
    most ``ROW_SUM_RENORM_TOL`` are renormalised with a warning), T >= 2,
    K >= 2. Instances are immutable and safe to share across threads.
    """

    r: NDArray[np.float64]
    w: NDArray[np.float64]

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        if r.ndim != 2 or w.shape != r.shape:
            raise DatasetError(f"r and w must be equal-shape T x K matrices, got {r.shape} and {w.shape}")
        T, K = r.shape
        if T < 2 or K < 2:
            raise DatasetError(f"need T >= 2 observations and K >= 2 goods, got T={T}, K={K}")
        if not np.all(np.isfinite(r)) or not np.all(r > 0):
            raise DatasetError("normalised prices must be finite and strictly positive")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DatasetError("budget shares must be finite and non-negative")
        sums = w.sum(axis=1)
        err = np.abs(sums - 1.0)
        worst = float(err.max())
        if worst > ROW_SUM_TOL:
            if worst > ROW_SUM_RENORM_TOL:
                i = int(err.argmax())
                raise DatasetError(
                    f"budget shares of observation {i} sum to {sums[i]:.15g}, "
                    f"off by more than {ROW_SUM_RENORM_TOL:g}"
                )
            warnings.warn(
                f"renormalising budget-share rows off by up to {worst:.3g} (tolerance {ROW_SUM_TOL:g})",
                stacklevel=2,
            )
            w = w / sums[:, None]
        object.__setattr__(self, "r", _freeze(r))
        object.__setattr__(self, "w", _freeze(w))

    @property
    def T(self) -> int:
        return self.r.shape[0]

    @property
    def K(self) -> int:
        return self.r.shape[1]

    def quantities(self) -> NDArray[np.float64]:
        """Bundle matrix x with x[i] = w[i] / r[i]; every row satisfies r[i] . x[i] = 1."""
        return self.w / self.r


@dataclass(frozen=True)
class PriceRatioTensor:
    """All pairwise normalised-price ratios and their Carli means.

    ``rho[i, j, k] = r[i, k] / r[j, k]`` and ``carli[i, j]`` is the mean of
    ``rho[i, j, :]`` over goods. Unit diagonal and reciprocal symmetry hold by
    construction.
    """

    rho: NDArray[np.float64]
    carli: NDArray[np.float64]

    @property
    def T(self) -> int:
        return self.rho.shape[0]

    @property
    def K(self) -> int:
        return self.rho.shape[2]


@dataclass(frozen=True)
class PartitionSpec:
    """Disjoint groups of good indices covering 0..K-1 (used by separability runs)."""

    groups: tuple[tuple[int, ...], ...]

    def __init__(self, groups: Sequence[Sequence[int]]):
        object.__setattr__(self, "groups", tuple(tuple(int(k) for k in g) for g in groups))
        if not self.groups or any(len(g) == 0 for g in self.groups):
            raise DatasetError("partition must contain at least one non-empty group")
        flat = [k for g in self.groups for k in g]
        if len(flat) != len(set(flat)):
            raise DatasetError("partition groups must be disjoint")

    def validate_covering(self, K: int) -> None:
        flat = sorted(k for g in self.groups for k in g)
        if flat != list(range(K)):
            raise DatasetError(f"partition must cover goods 0..{K - 1} exactly, got {flat}")

    @staticmethod
    def equal_groups(K: int, group_size: int, perm: Sequence[int] | None = None) -> "PartitionSpec":
        """Split goods (optionally permuted) into consecutive groups of ``group_size``."""
        if K % group_size != 0:
            raise DatasetError(f"group size {group_size} does not divide K={K}")
        order = list(range(K)) if perm is None else [int(p) for p in perm]
        if sorted(order) != list(range(K)):
            raise DatasetError("perm must be a permutation of 0..K-1")
        return PartitionSpec([order[i:i + group_size] for i in range(0, K, group_size)])


def normalize_prices(p: Sequence[float], m: float) -> NDArray[np.float64]:
    """Divide a raw price vector by income: r = p / m."""
    p = np.asarray(p, dtype=np.float64)
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise DatasetError("prices must be finite and strictly positive")
    if not np.isfinite(m) or m <= 0:
        raise DatasetError("income must be finite and strictly positive")
    return p / m


def shares_to_quantities(w: Sequence[float], r: Sequence[float]) -> NDArray[np.float64]:
    """Recover the bundle from budget shares: x[k] = w[k] / r[k], so r . x = 1."""
    w = np.asarray(w, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0):
        raise DatasetError("normalised prices must be strictly positive")
    return w / r


def carli_index(rho_edge: Sequence[float]) -> float:
    """Arithmetic mean of a vector of price ratios along one edge."""
    rho_edge = np.asarray(rho_edge, dtype=np.float64)
    if rho_edge.size == 0:
        raise DatasetError("cannot average an empty ratio vector")
    if np.any(rho_edge <= 0):
        raise DatasetError("price ratios must be strictly positive")
    return float(rho_edge.mean())


def price_ratios(dataset: Dataset) -> PriceRatioTensor:
    """Full T x T x K ratio tensor rho[i,j,k] = r[i,k]/r[j,k] plus Carli matrix."""
    r = dataset.r
    rho = r[:, None, :] / r[None, :, :]
    return PriceRatioTensor(rho=_freeze(rho), carli=_freeze(rho.mean(axis=2)))


def expenditure_matrix(dataset: Dataset) -> NDArray[np.float64]:
    """Cross-expenditure matrix e[i, j] = r[i] . x[j] with unit diagonal.

    Equivalently e[i, j] = sum_k rho[i,j,k] * w[j,k]; the two agree to
    floating precision and the diagonal equals one within ``DIAG_TOL``.
    """
    e = dataset.r @ dataset.quantities().T
    # the diagonal is 1 by construction of shares; pin it exactly
    np.fill_diagonal(e, 1.0)
    return e


# ---------------------------------------------------------------------------
# File formats. CSV is long form with header obs,good,r,w and one row per
# (observation, good) pair; obs/good labels are 1-based integers in files.
# JSON is {"T": ..., "K": ..., "r": [[...]], "w": [[...]]}.
# ---------------------------------------------------------------------------

def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["obs", "good", "r", "w"])
        for i in range(dataset.T):
            for k in range(dataset.K):
                out.writerow([i + 1, k + 1, repr(float(dataset.r[i, k])), repr(float(dataset.w[i, k]))])


def read_csv(path) -> Dataset:
    cells: dict[tuple[int, int], tuple[float, float]] = {}
    obs_labels: set[int] = set()
    good_labels: set[int] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty file", line=1) from None
        if [h.strip().lower() for h in header] != ["obs", "good", "r", "w"]:
            raise DatasetFormatError(f"expected header obs,good,r,w, got {','.join(header)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DatasetFormatError(f"expected 4 fields, got {len(row)}", line=lineno)
            try:
                i = int(row[0])
            except ValueError:
                raise DatasetFormatError(f"bad observation label {row[0]!r}", line=lineno, field="obs") from None
            try:
                k = int(row[1])
            except ValueError:
                raise DatasetFormatError(f"bad good label {row[1]!r}", line=lineno, field="good") from None
            try:
                rv = float(row[2])
            except ValueError:
                raise DatasetFormatError(f"bad price {row[2]!r}", line=lineno, field="r") from None
            try:
                wv = float(row[3])
            except ValueError:
                raise DatasetFormatError(f"bad share {row[3]!r}", line=lineno, field="w") from None
            if (i, k) in cells:
                raise DatasetFormatError(f"duplicate (obs, good) pair ({i}, {k})", line=lineno)
            cells[(i, k)] = (rv, wv)
            obs_labels.add(i)
            good_labels.add(k)
    if not cells:
        raise DatasetFormatError("no data rows", line=2)
    obs = sorted(obs_labels)
    goods = sorted(good_labels)
    r = np.empty((len(obs), len(goods)))
    w = np.empty_like(r)
    for ii, i in enumerate(obs):
        for kk, k in enumerate(goods):
            if (i, k) not in cells:
                raise DatasetFormatError(f"missing row for obs {i}, good {k}")
            r[ii, kk], w[ii, kk] = cells[(i, k)]
    try:
        return Dataset(r=r, w=w)
    except DatasetError as exc:
        raise DatasetFormatError(str(exc)) from exc


def write_json(dataset: Dataset, path) -> None:
    payload = {"T": dataset.T, "K": dataset.K, "r": dataset.r.tolist(), "w": dataset.w.tolist()}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def read_json(path) -> Dataset:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    for key in ("T", "K", "r", "w"):
        if key not in payload:
            raise DatasetFormatError(f"missing key {key!r}", field=key)
    r = np.asarray(payload["r"], dtype=np.float64)
    w = np.asarray(payload["w"], dtype=np.float64)
    if r.shape != (payload["T"], payload["K"]):
        raise DatasetFormatError(f"r has shape {r.shape}, expected ({payload['T']}, {payload['K']})", field="r")
    if w.shape != r.shape:
        raise DatasetFormatError(f"w has shape {w.shape}, expected {r.shape}", field="w")
    try:
        return Dataset(r=r, w=w)
    except DatasetError as exc:
        raise DatasetFormatError(str(exc)) from exc


def read_dataset(path) -> Dataset:
    """Dispatch on extension: .json -> JSON, anything else -> CSV."""
    if str(path).lower().endswith(".json"):
        return read_json(path)
    return read_csv(path)
