"""Shared fixtures and the independent (brute-force) reference paths.

The oracle_* helpers deliberately avoid the package's kernel and model
code paths: plain Python loops over ids, so they can vouch for the
production implementations.
"""

from __future__ import annotations

import itertools

import pytest

from ctxchoice import load_fixture


@pytest.fixture(scope="session")
def table1():
    return load_fixture("table1")


@pytest.fixture(scope="session")
def table4():
    return load_fixture("table4")


@pytest.fixture(scope="session")
def table5():
    return load_fixture("table5")


@pytest.fixture(scope="session")
def table6():
    return load_fixture("table6")


@pytest.fixture(scope="session")
def table7():
    return load_fixture("table7")


def oracle_utility(matrix, item, space) -> float:
    """Reference utility: diagonal plus in-space cross gains, summed in
    ascending catalog order with the diagonal added last."""
    order = list(matrix.catalog.items)
    k = order.index(item)
    idx = sorted(order.index(i) for i in set(space))
    assert k in idx
    gain = 0.0
    for i in idx:
        if i != k:
            gain += float(matrix.entries[k, i])
    return float(matrix.entries[k, k]) + gain


def oracle_best(matrix, space) -> str:
    """Reference argmax with first-in-catalog tie-breaking."""
    best = None
    best_u = None
    for item in matrix.catalog.items:
        if item not in set(space):
            continue
        u = oracle_utility(matrix, item, space)
        if best_u is None or u > best_u:
            best, best_u = item, u
    return best


def oracle_tipping(matrix, current, target, base, pool, validate_full):
    """Exhaustive filter over all pool subsets, then inclusion-minimal ones."""
    base = frozenset(base)
    pool = sorted(pool)
    qualifying = []
    for r in range(len(pool) + 1):
        for combo in itertools.combinations(pool, r):
            space = base | set(combo)
            if validate_full:
                ok = oracle_best(matrix, space) == target
            else:
                ok = oracle_utility(matrix, target, space) > oracle_utility(
                    matrix, current, space
                )
            if ok:
                qualifying.append(frozenset(combo))
    minimal = {
        s for s in qualifying if not any(q < s for q in qualifying)
    }
    return minimal
