"""Afriat inequality systems: feasibility, witnesses, and separability variants.

The unrestricted system asks for utility numbers U and multipliers lam >= 1
with U[j] - U[i] <= lam[i] * (e[i, j] - 1) for all i != j; feasibility is
equivalent to GARP. lam >= 1 replaces lam > 0 without loss: the system is
homogeneous, so any feasible point rescales. Also here: shortest-path
potentials that certify strict feasibility of the mean system, and the grouped
linear system for additive separability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset, DatasetError, PartitionSpec, expenditure_matrix
from .simplex import solve_feasibility

TOL_LP = 1e-8
TOL_LP_MARGINAL = 1e-6  # verdicts that flip between TOL_LP and this are flagged


class NegativeCycleError(DatasetError):
    """A cycle with negative tightened length, violating the positive-sum premise."""

    def __init__(self, cycle: tuple[int, ...], total: float):
        self.cycle = cycle
        self.total = total
        super().__init__(
            f"cycle {'->'.join(str(v) for v in cycle + (cycle[0],))} has tightened length {total:.6g} < 0"
        )


@dataclass(frozen=True)
class AfriatSystem:
    """Coefficient matrix e (unit diagonal) plus the multiplier floor."""

    e: NDArray[np.float64]
    lam_floor: float = 1.0

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 2:
            raise DatasetError(f"coefficient matrix must be square with T >= 2, got {e.shape}")
        if np.abs(np.diag(e) - 1.0).max() > 1e-12:
            raise DatasetError("coefficient matrix must have unit diagonal")
        if not (self.lam_floor > 0):
            raise DatasetError(f"lam_floor must be positive, got {self.lam_floor}")
        object.__setattr__(self, "e", e)

    @property
    def T(self) -> int:
        return self.e.shape[0]

    @staticmethod
    def from_dataset(dataset: Dataset, lam_floor: float = 1.0) -> "AfriatSystem":
        return AfriatSystem(e=expenditure_matrix(dataset), lam_floor=lam_floor)


@dataclass(frozen=True)
class LpWitness:
    """Feasibility verdict with a verifying (U, lam) when feasible.

    ``marginal`` marks numerically fragile instances whose verdict flips
    between the strict and loose tolerance; ``residual`` is the phase-1
    artificial sum (zero means comfortably feasible).
    """

    feasible: bool
    U: NDArray[np.float64] | None
    lam: NDArray[np.float64] | None
    residual: float
    marginal: bool = False


def _afriat_rows(e: NDArray[np.float64], lam_floor: float) -> tuple[NDArray, NDArray]:
    """Constraint rows over y = [U+ (T), U- (T), s (T)] with lam = lam_floor + s."""
    T = e.shape[0]
    ii, jj = np.nonzero(~np.eye(T, dtype=bool))
    m = ii.size
    coef = e[ii, jj] - 1.0
    G = np.zeros((m, 3 * T))
    rows = np.arange(m)
    G[rows, jj] += 1.0          # +U[j]
    G[rows, ii] -= 1.0          # -U[i]
    G[rows, T + jj] -= 1.0      # split negative parts
    G[rows, T + ii] += 1.0
    G[rows, 2 * T + ii] = -coef  # -(e_ij - 1) * s[i]
    h = lam_floor * coef
    return G, h


def solve_afriat(
    system: AfriatSystem,
    tol_lp: float = TOL_LP,
    orientation: str = "appendix",
) -> LpWitness:
    """Decide the Afriat system by phase-1 feasibility search.

    ``orientation`` selects which observation's multiplier scales the pair
    (i, j) constraint: "appendix" uses U[j]-U[i] <= lam[i](e[i,j]-1); the
    "transposed" variant swaps the roles (equivalent to transposing e). The
    GARP-equivalence tests pin "appendix" as the correct reading.
    """
    if orientation == "appendix":
        e = system.e
    elif orientation == "transposed":
        e = system.e.T
    else:
        raise ValueError(f"unknown orientation: {orientation!r}")
    T = system.T
    G, h = _afriat_rows(e, system.lam_floor)
    y, residual = solve_feasibility(G, h)
    feasible = residual <= tol_lp
    marginal = (residual <= TOL_LP_MARGINAL) != (residual <= TOL_LP)
    if not feasible:
        return LpWitness(feasible=False, U=None, lam=None, residual=residual, marginal=marginal)
    U = y[:T] - y[T:2 * T]
    lam = system.lam_floor + y[2 * T:]
    return LpWitness(feasible=True, U=U, lam=lam, residual=residual, marginal=marginal)


def verify_witness(system: AfriatSystem, witness: LpWitness, tol_lp: float = TOL_LP) -> bool:
    """Re-substitute (U, lam) into every pairwise constraint; slack >= -tol_lp."""
    if not witness.feasible or witness.U is None or witness.lam is None:
        return False
    e = system.e
    U, lam = witness.U, witness.lam
    if np.any(lam < system.lam_floor - tol_lp):
        return False
    slack = lam[:, None] * (e - 1.0) - (U[None, :] - U[:, None])
    np.fill_diagonal(slack, 0.0)
    return bool(slack.min() >= -tol_lp)


def lemma5_potentials(carli: NDArray[np.float64], eta: float) -> NDArray[np.float64]:
    """Potentials certifying the mean system is feasible with uniform slack.

    Tightens every edge weight to d[i, j] = carli[i, j] - 1 - eta/(2T) and
    returns shortest-path distances from vertex 0 (Bellman-Ford limited to
    T-1 relaxation rounds, as distinct-vertex paths suffice when no cycle is
    negative). The result U* has U*[0] = 0 and U*[j] - U*[i] <= d[i, j] for
    every ordered pair. A remaining negative cycle under d means the
    positive-cycle-sum premise fails and raises NegativeCycleError.
    """
    carli = np.asarray(carli, dtype=np.float64)
    T = carli.shape[0]
    if carli.shape != (T, T) or T < 2:
        raise DatasetError(f"carli matrix must be square with T >= 2, got {carli.shape}")
    if not (eta > 0):
        raise DatasetError(f"eta must be positive, got {eta}")
    eta0 = eta / (2 * T)
    d = carli - 1.0 - eta0
    np.fill_diagonal(d, np.inf)

    dist = np.full(T, np.inf)
    dist[0] = 0.0
    prev = np.full(T, -1, dtype=np.int64)
    for _ in range(T - 1):
        # synchronous relaxation of all edges
        cand = dist[:, None] + d
        best = cand.min(axis=0)
        arg = cand.argmin(axis=0)
        better = best < dist - 1e-15
        if not better.any():
            break
        dist = np.where(better, best, dist)
        prev[better] = arg[better]

    # one more round: any further improvement exposes a negative cycle
    cand = dist[:, None] + d
    best = cand.min(axis=0)
    if (best < dist - 1e-12).any():
        v = int((dist - best).argmax())
        prev[v] = int(cand[:, v].argmin())
        cycle = _walk_negative_cycle(prev, v, T)
        total = sum(d[cycle[k], cycle[(k + 1) % len(cycle)]] for k in range(len(cycle)))
        raise NegativeCycleError(tuple(cycle), float(total))
    return dist


def _walk_negative_cycle(prev: NDArray[np.int64], v: int, T: int) -> list[int]:
    for _ in range(T):
        v = int(prev[v])
    seen = []
    u = v
    while u not in seen:
        seen.append(u)
        u = int(prev[u])
    start = seen.index(u)
    cycle = seen[start:] if start else seen
    cycle.reverse()  # prev-walk runs against edge direction
    return cycle


# ---------------------------------------------------------------------------
# Additive separability: group utility numbers with a common multiplier
# sequence. Feasibility of
#   u[g, i] <= u[g, j] + lam[j] * gap(g, j, i)
# over all groups g and ordered pairs i != j, lam >= lam_floor, where the gap
# is the group affordability margin at j's prices. Two scalings of the gap:
#   "raw":              r_j^g . x_i^g - r_j^g . x_j^g   (the textbook form)
#   "group-normalised": r_j^g . x_i^g / (r_j^g . x_j^g) - 1, i.e. each
#                       within-group system renormalised by own group
#                       spending, the grouped analogue of e_ij - 1.
# The scalings coincide for a single group; the group-normalised form is the
# default because it reproduces the reference separability areas.
# ---------------------------------------------------------------------------

ADDITIVE_SCALINGS = ("group-normalised", "raw")


@dataclass(frozen=True)
class GroupedLpWitness:
    feasible: bool
    u: NDArray[np.float64] | None  # (n_groups, T)
    lam: NDArray[np.float64] | None
    residual: float
    marginal: bool = False


def _additive_rows(
    r: NDArray[np.float64],
    x: NDArray[np.float64],
    groups: tuple[tuple[int, ...], ...],
    lam_floor: float,
    scaling: str,
) -> tuple[NDArray, NDArray]:
    """Rows over y = [u+ (nG*T), u- (nG*T), s (T)], lam = lam_floor + s."""
    if scaling not in ADDITIVE_SCALINGS:
        raise ValueError(f"scaling must be one of {ADDITIVE_SCALINGS}, got {scaling!r}")
    T = r.shape[0]
    nG = len(groups)
    ii, jj = np.nonzero(~np.eye(T, dtype=bool))
    mg = ii.size
    m = nG * mg
    G = np.zeros((m, 2 * nG * T + T))
    h = np.empty(m)
    rows = np.arange(mg)
    for gi, g in enumerate(groups):
        cols = list(g)
        f = r[:, cols] @ x[:, cols].T            # f[j, i] = r_j^g . x_i^g
        a = f[jj, ii] - f[jj, jj]                # affordability gap at j's prices
        if scaling == "group-normalised":
            a = a / f[jj, jj]
        base = gi * mg
        off = gi * T
        G[base + rows, off + ii] += 1.0          # +u[g, i]
        G[base + rows, off + jj] -= 1.0          # -u[g, j]
        G[base + rows, nG * T + off + ii] -= 1.0
        G[base + rows, nG * T + off + jj] += 1.0
        G[base + rows, 2 * nG * T + jj] = -a     # -a * s[j]
        h[base + rows] = lam_floor * a
    return G, h


def additive_separability_feasible(
    dataset: Dataset,
    partition: PartitionSpec,
    tol_lp: float = TOL_LP,
    lam_floor: float = 1.0,
    scaling: str = "group-normalised",
) -> GroupedLpWitness:
    """Linear feasibility test for additive separability over the partition.

    With scaling="raw" feasibility is exactly additive rationalisability, so
    it implies GARP on the full data and within every group. The
    group-normalised scaling ties the multipliers differently and is not by
    itself a rationalisability test (it can accept GARP-violating data); the
    area estimator therefore always pairs it with the weak necessary
    conditions.
    """
    partition.validate_covering(dataset.K)
    return additive_feasible_arrays(
        dataset.r, dataset.quantities(), partition.groups, tol_lp, lam_floor, scaling,
    )


def additive_feasible_arrays(
    r: NDArray[np.float64],
    x: NDArray[np.float64],
    groups: tuple[tuple[int, ...], ...],
    tol_lp: float = TOL_LP,
    lam_floor: float = 1.0,
    scaling: str = "group-normalised",
) -> GroupedLpWitness:
    T = r.shape[0]
    nG = len(groups)
    G, h = _additive_rows(r, x, groups, lam_floor, scaling)
    y, residual = solve_feasibility(G, h)
    feasible = residual <= tol_lp
    marginal = (residual <= TOL_LP_MARGINAL) != (residual <= TOL_LP)
    if not feasible:
        return GroupedLpWitness(feasible=False, u=None, lam=None, residual=residual, marginal=marginal)
    u = (y[:nG * T] - y[nG * T:2 * nG * T]).reshape(nG, T)
    lam = lam_floor + y[2 * nG * T:]
    return GroupedLpWitness(feasible=True, u=u, lam=lam, residual=residual, marginal=marginal)
