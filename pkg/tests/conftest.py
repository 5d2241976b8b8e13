"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: GARP by
exhaustive cycle enumeration over itertools permutations, cycle counting by
direct enumeration, shortest paths by enumerating all simple paths.
"""

import itertools

import numpy as np
import pytest
from hypothesis import settings

import rparea as rp

settings.register_profile("ci", deadline=None, derandomize=True)
settings.load_profile("ci")

FIG1_R = np.array([[1 / 4, 1 / 3], [1 / 3, 1 / 4]])  # axis intercepts (4,3) and (3,4)
FIG2_R = np.array([[1 / 4, 1 / 3, 1 / 5], [1 / 3, 1 / 4, 1 / 2]])  # intercepts (4,3,5), (3,4,2)


@pytest.fixture
def fig1_prices():
    return FIG1_R.copy()


@pytest.fixture
def warp_violation_dataset():
    # crossing budgets with choices on the crossing segments: e = 0.65 both ways
    return rp.Dataset(r=np.array([[0.25, 0.5], [0.5, 0.25]]),
                      w=np.array([[0.1, 0.9], [0.9, 0.1]]))


@pytest.fixture
def no_crossing_dataset():
    # same budgets, choices on the outer segments: e = 1.85 both ways
    return rp.Dataset(r=np.array([[0.25, 0.5], [0.5, 0.25]]),
                      w=np.array([[0.9, 0.1], [0.1, 0.9]]))


def brute_force_garp(e, tol_edge=1e-9):
    """GARP by exhaustive enumeration of simple directed cycles.

    Violated iff some cycle has every edge weak (e <= 1 + tol) and at least
    one edge strict (e < 1 - tol). Independent of the library's graph code.
    """
    T = e.shape[0]
    for L in range(2, T + 1):
        for subset in itertools.combinations(range(T), L):
            for rest in itertools.permutations(subset[1:]):
                cycle = (subset[0],) + rest
                edges = list(zip(cycle, cycle[1:] + cycle[:1]))
                if all(e[i, j] <= 1 + tol_edge for i, j in edges) and any(
                    e[i, j] < 1 - tol_edge for i, j in edges
                ):
                    return False
    return True


def brute_force_cycle_count(T):
    """Count directed cycles on distinct vertices by direct enumeration."""
    count = 0
    for L in range(2, T + 1):
        for subset in itertools.combinations(range(T), L):
            for _ in itertools.permutations(subset[1:]):
                count += 1
    return count


def brute_force_shortest_paths(d):
    """Min cost over simple paths from vertex 0 to every vertex, by enumeration."""
    T = d.shape[0]
    best = np.full(T, np.inf)
    best[0] = 0.0
    others = [v for v in range(T) if v != 0]
    for L in range(1, T):
        for mids in itertools.permutations(others, L):
            path = (0,) + mids
            cost = sum(d[path[k], path[k + 1]] for k in range(L))
            if cost < best[path[-1]]:
                best[path[-1]] = cost
    return best


def random_dataset(rng, T=None, K=None, sigma=1.0):
    """Random dataset: log-normal inverse prices, uniform budget shares."""
    T = T if T is not None else int(rng.integers(2, 7))
    K = K if K is not None else int(rng.integers(2, 6))
    r = 1.0 / np.exp(sigma * rng.standard_normal((T, K)))
    y = rng.standard_exponential((T, K))
    w = y / y.sum(axis=1, keepdims=True)
    return rp.Dataset(r=r, w=w)


def random_telescoping_cycle(rng, L=None, K=None):
    """Edge ratio vectors whose componentwise product is exactly one."""
    L = L if L is not None else int(rng.integers(2, 7))
    K = K if K is not None else int(rng.integers(2, 9))
    edges = [np.exp(rng.normal(0.0, 0.7, size=K)) for _ in range(L - 1)]
    last = 1.0 / np.prod(np.stack(edges), axis=0)
    return edges + [last]
