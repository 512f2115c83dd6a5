"""Pure-Python twin of the compiled kernels in ``_ckern.pyx``.

Selected by ``ctxchoice.kernels`` when the extension is missing or the
CTXCHOICE_PURE=1 override is set. The summation order (diagonal entry
first, then off-diagonal entries in ascending catalog order) is
load-bearing: both backends and the scalar reference path must produce
bit-identical floats, otherwise near-tie argmax decisions could differ
between paths.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def space_utilities(entries: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """In-context utility of each item of ``idx`` within the space ``idx``.

    ``idx`` holds catalog row indices in ascending order.
    """
    m = len(idx)
    out = np.empty(m, dtype=np.float64)
    for j in range(m):
        k = idx[j]
        gain = 0.0
        for i in idx:
            if i != k:
                gain += entries[k, i]
        out[j] = entries[k, k] + gain
    return out


def best_index(entries: np.ndarray, idx: np.ndarray) -> int:
    """Position within ``idx`` of the argmax utility; first position wins ties."""
    best = 0
    best_u = None
    for j in range(len(idx)):
        k = idx[j]
        gain = 0.0
        for i in idx:
            if i != k:
                gain += entries[k, i]
        u = entries[k, k] + gain
        if best_u is None or u > best_u:
            best = j
            best_u = u
    return best


def _popcount_order(p: int) -> list[int]:
    return sorted(range(1 << p), key=lambda m: (m.bit_count(), m))


def minimal_tipping_masks(
    entries: np.ndarray,
    cur: int,
    tgt: int,
    base_idx: np.ndarray,
    pool_idx: np.ndarray,
    validate_full: bool,
) -> list[int]:
    """Inclusion-minimal pool subsets (as bitmasks) that reverse cur -> tgt.

    A mask qualifies when, in base + masked pool items, either the
    target's utility strictly exceeds the current item's
    (validate_full=False) or the target is the outright winner under
    first-index tie-breaking (validate_full=True). Masks are scanned in
    (popcount, value) order so every qualifying proper subset is seen
    before its supersets; the returned list is an antichain in that
    order.
    """
    p = len(pool_idx)
    base = [int(i) for i in base_idx]
    pool = [int(i) for i in pool_idx]

    minimal: list[int] = []
    for mask in _popcount_order(p):
        dominated = False
        for known in minimal:
            if mask & known == known:
                dominated = True
                break
        if dominated:
            continue

        space = _merge(base, pool, mask)
        if validate_full:
            ok = _target_wins(entries, tgt, space)
        else:
            ok = _utility(entries, tgt, space) > _utility(entries, cur, space)
        if ok:
            minimal.append(mask)
    return minimal


def _merge(base: list[int], pool: list[int], mask: int) -> list[int]:
    """Ascending merge of the base indices with the masked pool indices."""
    picked = [pool[b] for b in range(len(pool)) if mask >> b & 1]
    out = []
    i = j = 0
    while i < len(base) and j < len(picked):
        if base[i] < picked[j]:
            out.append(base[i])
            i += 1
        else:
            out.append(picked[j])
            j += 1
    out.extend(base[i:])
    out.extend(picked[j:])
    return out


def _utility(entries: np.ndarray, k: int, space: list[int]) -> float:
    gain = 0.0
    for i in space:
        if i != k:
            gain += entries[k, i]
    return entries[k, k] + gain


def _target_wins(entries: np.ndarray, tgt: int, space: list[int]) -> bool:
    tu = _utility(entries, tgt, space)
    for k in space:
        if k == tgt:
            continue
        u = _utility(entries, k, space)
        if u > tu or (u == tu and k < tgt):
            return False
    return True
