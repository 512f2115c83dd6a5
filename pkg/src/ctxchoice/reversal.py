"""Reversal analysis: which added items flip a choice, and how.

Given a current winner and a desired target inside a base space, the
questions answered here are: how large is the utility gap, which
external items favor the target (positive per-item delta), what is the
widest-gap augmentation, and which minimal additions actually tip the
choice. Outcomes of a space change are classified into four cases:
keeping the choice, reversing to a previously offered item, a newly
added item winning, or reversing to some other prior item.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .errors import PoolTooLargeError, SpacesNotNestedError, ValidationError
from .model import ChoiceSpace, ItemId, UtilityMatrix, best_choice, contextual_utility

DEFAULT_POOL_CAP = 16


@dataclass(frozen=True)
class Gap:
    """Signed utility difference target minus current inside one space."""

    current: ItemId
    target: ItemId
    space: frozenset
    value: float


@dataclass(frozen=True)
class ItemDelta:
    """How much an external item favors the target over the current choice."""

    item: ItemId
    delta: float


@dataclass(frozen=True)
class TippingBase:
    """Antichain of minimal additions that each achieve the reversal.

    Every qualifying addition (any subset of the pool that reverses the
    choice) is a superset of at least one member.
    """

    sets: tuple[tuple[ItemId, ...], ...]

    def __len__(self) -> int:
        return len(self.sets)

    def as_lists(self) -> list[list[ItemId]]:
        return [list(s) for s in self.sets]


class OutcomeClass(enum.Enum):
    UNCHANGED = "UNCHANGED"
    REVERSAL_TO_PRIOR_ITEM = "REVERSAL_TO_PRIOR_ITEM"
    NEW_ITEM_CHOSEN = "NEW_ITEM_CHOSEN"
    OTHER_REVERSAL = "OTHER_REVERSAL"


def _check_pair(current: ItemId, target: ItemId) -> None:
    if current == target:
        raise ValidationError("current and target must be distinct items")


def gap(matrix: UtilityMatrix, current: ItemId, target: ItemId, space: ChoiceSpace) -> Gap:
    """Utility gap d = U(target) - U(current) in ``space``.

    Negative while the current item stands; the reversal machinery
    looks for additions that push it strictly positive.
    """
    _check_pair(current, target)
    ids = frozenset(space)
    value = contextual_utility(matrix, target, ids) - contextual_utility(matrix, current, ids)
    return Gap(current=current, target=target, space=ids, value=float(value))


def positive_d_items(
    matrix: UtilityMatrix,
    current: ItemId,
    target: ItemId,
    pool: Iterable[ItemId],
) -> list[ItemDelta]:
    """Pool items whose cross gains strictly favor the target.

    delta(m) = a[target, m] - a[current, m]; only delta > 0 qualifies.
    Sorted by descending delta, ties by catalog order.
    """
    _check_pair(current, target)
    pool_ids = set(pool)
    if pool_ids & {current, target}:
        raise ValidationError("pool must not contain the compared pair")
    cat = matrix.catalog
    t_row = cat.index(target)
    c_row = cat.index(current)
    deltas = []
    for m in pool_ids:
        i = cat.index(m)
        d = float(matrix.entries[t_row, i] - matrix.entries[c_row, i])
        if d > 0.0:
            deltas.append((m, d, i))
    deltas.sort(key=lambda e: (-e[1], e[2]))
    return [ItemDelta(item=m, delta=d) for m, d, _ in deltas]


def max_gap_augmentation(
    matrix: UtilityMatrix,
    current: ItemId,
    target: ItemId,
    base_space: ChoiceSpace,
    pool: Iterable[ItemId],
) -> tuple[frozenset, Gap]:
    """The widest-gap addition: all positive-delta pool items at once.

    Under additivity every positive-delta item widens the gap and every
    other item narrows or preserves it, so taking exactly the positive
    ones is optimal. The gap may still come out negative (the reversal
    is then unreachable from this pool).
    """
    base = frozenset(base_space)
    _validate_pool(matrix, base, pool, current, target)
    addition = frozenset(d.item for d in positive_d_items(matrix, current, target, pool))
    return addition, gap(matrix, current, target, base | addition)


def _validate_pool(matrix, base: frozenset, pool, current, target) -> frozenset:
    pool_ids = frozenset(pool)
    for m in pool_ids:
        matrix.catalog.index(m)
    if pool_ids & base:
        raise ValidationError("pool items must be external to the base space")
    if current not in base:
        raise ValidationError(f"current item {current!r} must be in the base space")
    if target not in base:
        raise ValidationError(f"target item {target!r} must be in the base space")
    return pool_ids


def minimal_tipping_sets(
    matrix: UtilityMatrix,
    current: ItemId,
    target: ItemId,
    base_space: ChoiceSpace,
    pool: Iterable[ItemId],
    validate_full: bool = False,
    cap: int = DEFAULT_POOL_CAP,
) -> TippingBase:
    """All inclusion-minimal pool subsets whose addition reverses the choice.

    With ``validate_full`` off, a subset qualifies as soon as the
    target's utility strictly exceeds the current item's. With it on, a
    subset qualifies only when the target is the outright winner of the
    augmented space, which excludes the case where some added item
    overshoots and wins itself.

    Exhaustive over all 2^|pool| subsets; pools beyond ``cap`` are
    rejected (see greedy_tipping_set for the approximate fallback).
    """
    _check_pair(current, target)
    base = frozenset(base_space)
    pool_ids = _validate_pool(matrix, base, pool, current, target)
    if len(pool_ids) > cap:
        raise PoolTooLargeError(len(pool_ids), cap)

    cat = matrix.catalog
    base_idx = cat.space_indices(base)
    pool_idx = np.asarray(sorted(cat.index(m) for m in pool_ids), dtype=np.int64)
    masks = kernels.minimal_tipping_masks(
        matrix.entries,
        cat.index(current),
        cat.index(target),
        base_idx,
        pool_idx,
        bool(validate_full),
    )
    sets = tuple(
        tuple(cat.items[int(pool_idx[b])] for b in range(len(pool_idx)) if mask >> b & 1)
        for mask in masks
    )
    return TippingBase(sets=sets)


def greedy_tipping_set(
    matrix: UtilityMatrix,
    current: ItemId,
    target: ItemId,
    base_space: ChoiceSpace,
    pool: Iterable[ItemId],
) -> frozenset | None:
    """Approximate tipping set for pools beyond the enumeration cap.

    Adds items by descending delta until the gap turns positive.
    Exact for the widest-gap question, approximate for minimality (the
    returned set is small but not guaranteed inclusion-minimal).
    Returns None when even all positive-delta items cannot tip.
    """
    base = frozenset(base_space)
    _validate_pool(matrix, base, pool, current, target)
    g = gap(matrix, current, target, base).value
    if g > 0.0:
        return frozenset()
    chosen: set[ItemId] = set()
    for d in positive_d_items(matrix, current, target, pool):
        chosen.add(d.item)
        g = gap(matrix, current, target, base | chosen).value
        if g > 0.0:
            return frozenset(chosen)
    return None


def classify_outcome(
    matrix: UtilityMatrix,
    old_space: ChoiceSpace,
    new_space: ChoiceSpace,
    target: ItemId | None = None,
) -> OutcomeClass:
    """Classify what a nested space change did to the predicted choice.

    Spaces must be nested (items added or items removed, not both).
    When a reversal ``target`` is designated, landing on a different
    prior item is OTHER_REVERSAL rather than REVERSAL_TO_PRIOR_ITEM.
    """
    old_ids = frozenset(old_space)
    new_ids = frozenset(new_space)
    if not (old_ids <= new_ids or new_ids <= old_ids):
        raise SpacesNotNestedError()
    old_winner = best_choice(matrix, old_ids)
    new_winner = best_choice(matrix, new_ids)
    if new_winner == old_winner:
        return OutcomeClass.UNCHANGED
    if new_winner not in old_ids:
        return OutcomeClass.NEW_ITEM_CHOSEN
    if target is None or new_winner == target:
        return OutcomeClass.REVERSAL_TO_PRIOR_ITEM
    return OutcomeClass.OTHER_REVERSAL


def reversal_report(
    matrix: UtilityMatrix,
    current: ItemId,
    target: ItemId,
    base_space: ChoiceSpace,
    pool: Iterable[ItemId],
    validate_full: bool = False,
    cap: int = DEFAULT_POOL_CAP,
) -> dict:
    """Full analysis document: gap, per-item deltas, tipping base, outcome.

    The outcome classifies the widest-gap augmentation (base plus all
    positive-delta items) against the base space.
    """
    base = frozenset(base_space)
    g = gap(matrix, current, target, base)
    deltas = positive_d_items(matrix, current, target, pool)
    tipping = minimal_tipping_sets(
        matrix, current, target, base, pool, validate_full=validate_full, cap=cap
    )
    addition, augmented = max_gap_augmentation(matrix, current, target, base, pool)
    outcome = classify_outcome(matrix, base, base | addition, target=target)
    cat = matrix.catalog
    return {
        "current": current,
        "target": target,
        "base_space": list(cat.sort_space(base)),
        "gap": g.value,
        "positive_d": [{"item": d.item, "delta": d.delta} for d in deltas],
        "max_gap_addition": list(cat.sort_space(addition)) if addition else [],
        "max_gap": augmented.value,
        "base": tipping.as_lists(),
        "outcome_class": outcome.value,
        "validate_full": bool(validate_full),
    }
