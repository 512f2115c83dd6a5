"""Conditional-utility matrices and contextual choice.

The model is an n x n matrix over a fixed item catalog: the diagonal
holds each item's stand-alone utility, entry (i, j) the extra utility
item i gains from item j being co-present in the offered set. An item's
utility inside a choice space is its diagonal value plus the cross
gains from the other items actually present, and the predicted choice
is the utility argmax with ties broken by catalog order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from . import kernels
from .errors import (
    EmptySpaceError,
    ItemNotInSpaceError,
    UnknownItemError,
    ValidationError,
)

ItemId = str

# A choice space is any iterable of item ids; functions canonicalize it
# against the catalog. Frozensets are used wherever identity matters.
ChoiceSpace = Iterable[ItemId]

# Maps (item, set of co-present other items) to the total gain the item
# receives from that set; the empty set must map to 0.
GainOracle = Callable[[ItemId, frozenset], float]


@dataclass(frozen=True)
class Catalog:
    """Ordered universe of item ids; the order fixes matrix row/column indices."""

    items: tuple[ItemId, ...]
    labels: Mapping[ItemId, str] | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.items:
            raise ValidationError("catalog must contain at least one item")
        for item in self.items:
            if not isinstance(item, str) or not item:
                raise ValidationError(f"item ids must be non-empty strings, got {item!r}")
        index = {item: i for i, item in enumerate(self.items)}
        if len(index) != len(self.items):
            raise ValidationError("catalog contains duplicate item ids")
        object.__setattr__(self, "items", tuple(self.items))
        self._index.update(index)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item: object) -> bool:
        return item in self._index

    def index(self, item: ItemId) -> int:
        try:
            return self._index[item]
        except KeyError:
            raise UnknownItemError(item) from None

    def label(self, item: ItemId) -> str:
        if self.labels and item in self.labels:
            return self.labels[item]
        return item

    def space_indices(self, space: ChoiceSpace) -> np.ndarray:
        """Catalog indices of a choice space, ascending; validates membership."""
        ids = set(space)
        if not ids:
            raise EmptySpaceError()
        idx = sorted(self.index(item) for item in ids)
        return np.asarray(idx, dtype=np.int64)

    def sort_space(self, space: ChoiceSpace) -> tuple[ItemId, ...]:
        """Items of a space in catalog order."""
        return tuple(self.items[i] for i in self.space_indices(space))


@dataclass(frozen=True)
class UtilityMatrix:
    """Square conditional-utility matrix bound to a catalog."""

    catalog: Catalog
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.catalog)
        arr = np.array(self.entries, dtype=np.float64, copy=True)
        if arr.shape != (n, n):
            raise ValidationError(
                f"entries must be {n}x{n} to match the catalog, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix entries must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return len(self.catalog)

    def diagonal(self) -> dict[ItemId, float]:
        """Stand-alone utility of every catalog item."""
        return {item: float(self.entries[i, i]) for i, item in enumerate(self.catalog.items)}

    def entry(self, row: ItemId, col: ItemId) -> float:
        return float(self.entries[self.catalog.index(row), self.catalog.index(col)])

    def to_dict(self) -> dict:
        doc: dict = {"catalog": list(self.catalog.items)}
        if self.catalog.labels:
            doc["labels"] = dict(self.catalog.labels)
        doc["entries"] = [[float(v) for v in row] for row in self.entries]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "UtilityMatrix":
        try:
            items = doc["catalog"]
            entries = doc["entries"]
        except KeyError as exc:
            raise ValidationError(f"matrix document missing key {exc}") from None
        catalog = Catalog(tuple(items), labels=doc.get("labels"))
        return cls(catalog, np.asarray(entries, dtype=np.float64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "UtilityMatrix":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read matrix file {path}: {exc}") from None
        return cls.from_dict(doc)


def contextual_utility(matrix: UtilityMatrix, item: ItemId, space: ChoiceSpace) -> float:
    """Utility of ``item`` inside ``space``: diagonal plus co-presence gains.

    Sums over the presented space only, never the full catalog.
    """
    idx = matrix.catalog.space_indices(space)
    k = matrix.catalog.index(item)
    if k not in idx:
        raise ItemNotInSpaceError(item)
    entries = matrix.entries
    # Accumulate cross gains separately, then add the diagonal once:
    # the same association order as every other utility path, so all
    # paths agree bit-for-bit.
    gain = 0.0
    for i in idx:
        if i != k:
            gain += entries[k, i]
    return float(entries[k, k] + gain)


def utility_table(matrix: UtilityMatrix, space: ChoiceSpace) -> dict[ItemId, float]:
    """Contextual utility of every item in the space, keyed in catalog order."""
    idx = matrix.catalog.space_indices(space)
    values = kernels.space_utilities(matrix.entries, idx)
    return {matrix.catalog.items[i]: float(values[j]) for j, i in enumerate(idx)}


def best_choice(matrix: UtilityMatrix, space: ChoiceSpace) -> ItemId:
    """Argmax of the utility table; ties go to the earliest catalog item."""
    idx = matrix.catalog.space_indices(space)
    j = kernels.best_index(matrix.entries, idx)
    return matrix.catalog.items[int(idx[j])]


def scale_matrix(matrix: UtilityMatrix, c: float) -> UtilityMatrix:
    """Multiply every entry by ``c`` (> 0). Choices are invariant to this."""
    if not (isinstance(c, (int, float)) and math.isfinite(c) and c > 0):
        raise ValidationError(f"scale factor must be a positive finite number, got {c!r}")
    return UtilityMatrix(matrix.catalog, matrix.entries * float(c))


def additive_gains(matrix: UtilityMatrix) -> GainOracle:
    """Gain oracle that sums the matrix's off-diagonal entries.

    Under this closure the subset-valued evaluation collapses to the
    matrix model; it is the reference point the non-additive oracle is
    compared against.
    """

    def gains(item: ItemId, others: frozenset) -> float:
        k = matrix.catalog.index(item)
        total = 0.0
        for i in sorted(matrix.catalog.index(o) for o in others):
            if i != k:
                total += matrix.entries[k, i]
        return float(total)

    return gains


def full_method_utility(
    base: Mapping[ItemId, float],
    gains: GainOracle,
    item: ItemId,
    space: ChoiceSpace,
) -> float:
    """Subset-valued utility: stand-alone value plus the gain of the whole
    co-present set, queried as one subset.

    This captures interactions inside the co-present group that the
    additive matrix cannot, at the cost of needing one gain value per
    subset (2^n of them). It exists as a desk-scale testing oracle, not
    a runtime path.
    """
    ids = frozenset(space)
    if not ids:
        raise EmptySpaceError()
    if item not in ids:
        raise ItemNotInSpaceError(item)
    for other in ids:
        if other not in base:
            raise UnknownItemError(other)
    return float(base[item]) + float(gains(item, ids - {item}))
