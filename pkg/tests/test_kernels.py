"""Backend equivalence: the compiled kernels and the pure twin must agree
bit-for-bit, including on deliberately tied utilities."""

import numpy as np
import pytest

from ctxchoice import sample_matrix
from ctxchoice._kernels import pure

compiled = pytest.importorskip(
    "ctxchoice._kernels._ckern", reason="compiled kernels not built"
)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    m = sample_matrix(n, seed=seed, sparsity=float(rng.random()))
    size = int(rng.integers(1, n + 1))
    idx = np.sort(rng.choice(n, size=size, replace=False)).astype(np.int64)
    return m.entries, idx


def test_space_utilities_bit_identical():
    for seed in range(200):
        entries, idx = _random_case(seed)
        a = pure.space_utilities(entries, idx)
        b = compiled.space_utilities(entries, idx)
        assert np.array_equal(a, b)


def test_best_index_identical():
    for seed in range(200):
        entries, idx = _random_case(seed)
        assert pure.best_index(entries, idx) == compiled.best_index(entries, idx)


def test_best_index_ties_resolved_identically():
    # integer matrices force exact utility ties
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(3, 7))
        entries = rng.integers(0, 3, size=(n, n)).astype(np.float64)
        entries.setflags(write=False)
        idx = np.arange(n, dtype=np.int64)
        assert pure.best_index(entries, idx) == compiled.best_index(entries, idx)


def test_minimal_tipping_masks_identical():
    for seed in range(60):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 9))
        m = sample_matrix(n, seed=seed, sparsity=0.4)
        all_idx = np.arange(n, dtype=np.int64)
        base = all_idx[:2]
        pool = all_idx[2:]
        for full in (False, True):
            a = pure.minimal_tipping_masks(m.entries, 0, 1, base, pool, full)
            b = compiled.minimal_tipping_masks(m.entries, 0, 1, base, pool, full)
            assert a == b


def test_minimal_tipping_masks_integer_ties_identical():
    rng = np.random.default_rng(42)
    for _ in range(40):
        n = int(rng.integers(4, 7))
        entries = rng.integers(-2, 3, size=(n, n)).astype(np.float64)
        entries.setflags(write=False)
        all_idx = np.arange(n, dtype=np.int64)
        for full in (False, True):
            a = pure.minimal_tipping_masks(entries, 0, 1, all_idx[:2], all_idx[2:], full)
            b = compiled.minimal_tipping_masks(entries, 0, 1, all_idx[:2], all_idx[2:], full)
            assert a == b


def test_backend_selector_reports_a_backend():
    from ctxchoice import kernels

    assert kernels.BACKEND in ("compiled", "pure")
