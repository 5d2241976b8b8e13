"""Dense phase-1 simplex for small linear feasibility systems.

Decides whether {y >= 0 : G y <= h} is non-empty by minimising the sum of
artificial variables from an all-slack start. Pricing is Dantzig's rule for
speed, with a permanent switch to Bland's rule if the objective stalls, which
guarantees termination; every tie is broken toward the lowest index so runs
are deterministic.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
PROGRESS_TOL = 1e-12


class SimplexStallError(RuntimeError):
    """No progress before the iteration cap; distinct from infeasibility."""


def solve_feasibility(
    G: NDArray[np.float64],
    h: NDArray[np.float64],
    max_iter: int | None = None,
) -> tuple[NDArray[np.float64], float]:
    """Phase-1 solve of {y >= 0 : G y <= h}.

    Returns (y, residual): residual is the optimal artificial sum, zero (up to
    solver tolerance) iff the system is feasible, in which case y is a point
    whose worst constraint violation is at most the residual.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    m, n = G.shape
    if h.shape != (m,):
        raise ValueError(f"h has shape {h.shape}, expected ({m},)")
    if max_iter is None:
        max_iter = 50 * max(m, 1)

    neg = h < 0
    n_art = int(neg.sum())
    width = n + m + n_art + 1
    tab = np.zeros((m + 1, width), dtype=np.float64)
    basis = np.empty(m, dtype=np.int64)

    art_col = n + m
    for r in range(m):
        if neg[r]:
            tab[r, :n] = -G[r]
            tab[r, n + r] = -1.0
            tab[r, art_col] = 1.0
            tab[r, -1] = -h[r]
            basis[r] = art_col
            art_col += 1
        else:
            tab[r, :n] = G[r]
            tab[r, n + r] = 1.0
            tab[r, -1] = h[r]
            basis[r] = n + r
    if n_art == 0:
        return np.zeros(n), 0.0

    # objective row holds z_j - c_j for min(sum of artificials); its rhs cell
    # is the current artificial sum
    obj = tab[m]
    obj[:] = tab[:m][neg].sum(axis=0)
    obj[n + m:width - 1] -= 1.0

    bland = False
    stall = 0
    stall_window = 2 * (m + n)
    last_value = obj[-1]
    structural = width - 1  # entering candidates: everything except rhs

    for _ in range(max_iter):
        if bland:
            enter = -1
            for j in range(structural):
                if obj[j] > COST_TOL:
                    enter = j
                    break
        else:
            enter = int(np.argmax(obj[:structural]))
            if obj[enter] <= COST_TOL:
                enter = -1
        if enter < 0:
            break  # optimal

        col = tab[:m, enter]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise SimplexStallError("entering column has no positive pivot (numerical failure)")
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / col[pos]
        best = ratios.min()
        tied = np.flatnonzero(ratios <= best + PROGRESS_TOL)
        if bland:
            leave = int(tied[np.argmin(basis[tied])])
        else:
            leave = int(tied[0])

        piv = tab[leave, enter]
        tab[leave] /= piv
        colvals = tab[:, enter].copy()
        colvals[leave] = 0.0
        tab -= np.outer(colvals, tab[leave])
        tab[:, enter] = 0.0
        tab[leave, enter] = 1.0
        basis[leave] = enter

        value = obj[-1]
        if value > last_value - PROGRESS_TOL:
            stall += 1
            if stall >= stall_window:
                bland = True
        else:
            stall = 0
        last_value = value
    else:
        raise SimplexStallError(f"no optimum within {max_iter} iterations")

    residual = float(max(obj[-1], 0.0))
    y = np.zeros(n)
    for r in range(m):
        if basis[r] < n:
            y[basis[r]] = tab[r, -1]
    np.maximum(y, 0.0, out=y)
    return y, residual
