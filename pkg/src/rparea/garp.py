"""Revealed-preference graphs, transitive closure, and GARP verdicts.

The weak relation places an edge i -> j whenever observation i could afford
bundle j (e[i, j] <= 1 + tol); the strict relation requires money left over
(e[i, j] < 1 - tol). GARP fails exactly when some j is reachable from i
through weak edges while j strictly prefers-back i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset, expenditure_matrix

# tie handling: sampled shares never hit e == 1 (measure zero), file data might
TOL_EDGE_MC = 0.0
TOL_EDGE_FILE = 1e-9


@dataclass(frozen=True)
class RPGraph:
    """Weak/strict adjacency and the transitive closure of the weak relation."""

    weak: NDArray[np.bool_]
    strict: NDArray[np.bool_]
    closure: NDArray[np.bool_]
    tol_edge: float

    @property
    def T(self) -> int:
        return self.weak.shape[0]


@dataclass(frozen=True)
class GarpVerdict:
    satisfied: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.satisfied


def build_graph(e: NDArray[np.float64], tol_edge: float = TOL_EDGE_FILE) -> RPGraph:
    """Threshold the expenditure matrix into weak/strict edges and close them.

    Closure is reflexive-transitive reachability over weak edges, computed by
    O(T^3) dynamic programming over intermediate vertices.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ValueError(f"expenditure matrix must be square, got {e.shape}")
    weak = e <= 1.0 + tol_edge
    strict = e < 1.0 - tol_edge
    closure = _transitive_closure(weak)
    for a in (weak, strict, closure):
        a.setflags(write=False)
    return RPGraph(weak=weak, strict=strict, closure=closure, tol_edge=tol_edge)


def _transitive_closure(adj: NDArray[np.bool_]) -> NDArray[np.bool_]:
    closure = adj.copy()
    np.fill_diagonal(closure, True)
    for mid in range(closure.shape[0]):
        # reach[i, j] |= reach[i, mid] & reach[mid, j]
        closure |= np.outer(closure[:, mid], closure[mid, :])
    return closure


def has_directed_cycle(graph: RPGraph | NDArray[np.bool_]) -> bool:
    """True iff the weak relation contains a directed cycle on >= 2 vertices.

    Self-loops are ignored; used as the Monte Carlo fast path where the
    weak/strict distinction vanishes almost surely.
    """
    adj = graph.weak if isinstance(graph, RPGraph) else np.asarray(graph, dtype=bool)
    adj = adj.copy()
    np.fill_diagonal(adj, False)
    return bool(batch_has_cycle(adj[None, :, :])[0])


def batch_has_cycle(adj: NDArray[np.bool_]) -> NDArray[np.bool_]:
    """Vectorised cycle detection over a (n, T, T) stack of adjacency matrices.

    Iteratively discards vertices with no surviving successor; the survivors
    are exactly the vertices with a path into a cycle, so a graph is cyclic
    iff any vertex survives. Diagonals must already be False.
    """
    alive = np.ones(adj.shape[:2], dtype=bool)
    while True:
        new_alive = (adj & alive[:, None, :]).any(axis=2) & alive
        if np.array_equal(new_alive, alive):
            break
        alive = new_alive
    return alive.any(axis=1)


def batch_garp_satisfied(e: NDArray[np.float64], tol_edge: float = TOL_EDGE_MC) -> NDArray[np.bool_]:
    """GARP indicator for a (n, T, T) stack of expenditure matrices, fast path.

    Treats every weak edge as a potential violation edge, which is exact when
    ties e == 1 have probability zero (continuously sampled shares).
    """
    adj = e <= 1.0 + tol_edge
    idx = np.arange(adj.shape[1])
    adj[:, idx, idx] = False
    return ~batch_has_cycle(adj)


def batch_garp_satisfied_strict(e: NDArray[np.float64], tol_edge: float = TOL_EDGE_FILE) -> NDArray[np.bool_]:
    """Exact GARP indicator for a (n, T, T) stack, honouring weak/strict ties.

    A violation needs closure(weak)[i, j] together with strict[j, i]; computed
    with batched boolean matrix squaring, so degenerate data with exact ties
    (chained designs, identical budgets) are judged correctly.
    """
    weak = e <= 1.0 + tol_edge
    strict = e < 1.0 - tol_edge
    n, T, _ = weak.shape
    idx = np.arange(T)
    strict[:, idx, idx] = False  # e_ii = 1 in exact arithmetic; drop float noise
    closure = weak.copy()
    closure[:, idx, idx] = True
    hops = 1
    while hops < T:
        reach = np.matmul(closure.astype(np.float32), closure.astype(np.float32)) > 0.5
        if np.array_equal(reach, closure):
            closure = reach
            break
        closure = reach
        hops *= 2
    violation = (closure & np.swapaxes(strict, 1, 2)).any(axis=(1, 2))
    return ~violation


def check_garp(dataset: Dataset, tol_edge: float = TOL_EDGE_FILE) -> GarpVerdict:
    """Full GARP test with a violating-cycle witness on failure.

    The witness is a vertex sequence (i_1, ..., i_L, i_1): consecutive pairs
    are weak edges and the closing edge i_L -> i_1 is strict. Violations are
    scanned in row-major order, so the verdict is deterministic.
    """
    e = expenditure_matrix(dataset)
    return check_garp_from_expenditures(e, tol_edge)


def check_garp_from_expenditures(e: NDArray[np.float64], tol_edge: float = TOL_EDGE_FILE) -> GarpVerdict:
    graph = build_graph(e, tol_edge)
    T = graph.T
    for i in range(T):
        for j in range(T):
            if graph.closure[i, j] and graph.strict[j, i]:
                path = _weak_path(graph.weak, i, j)
                return GarpVerdict(satisfied=False, witness=tuple(path) + (i,))
    return GarpVerdict(satisfied=True, witness=None)


def _weak_path(weak: NDArray[np.bool_], src: int, dst: int) -> list[int]:
    """Shortest weak-edge path src -> dst by BFS (deterministic neighbour order)."""
    if src == dst:
        return [src]
    T = weak.shape[0]
    prev = [-1] * T
    seen = [False] * T
    seen[src] = True
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(T):
                if u != v and weak[u, v] and not seen[v]:
                    seen[v] = True
                    prev[v] = u
                    if v == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(prev[path[-1]])
                        return path[::-1]
                    nxt.append(v)
        frontier = nxt
    raise AssertionError("closure claims reachability but BFS found no path")


def enumerate_cycles(T: int) -> int:
    """Exact count of directed cycles on distinct vertices of [T].

    Sums binom(T, L) * (L-1)! over cycle lengths L = 2..T; exact integers for
    any T via Python's arbitrary precision.
    """
    if T < 2:
        raise ValueError(f"need T >= 2, got {T}")
    return sum(math.comb(T, L) * math.factorial(L - 1) for L in range(2, T + 1))


def directed_cycles(T: int, vertices: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every directed cycle on distinct vertices exactly once.

    Each cycle is canonicalised to start at its smallest vertex; the closing
    edge back to the start is implicit. Total count equals enumerate_cycles(T).
    """
    verts = list(range(T)) if vertices is None else list(vertices)
    for L in range(2, len(verts) + 1):
        for subset in combinations(verts, L):
            head = subset[0]
            for rest in permutations(subset[1:]):
                yield (head,) + rest
