"""Domain exception types shared across the engine.

Every error carries a machine-readable ``code`` plus an optional
``details`` mapping so the HTTP service can serialize failures as
``{code, message, details}`` without inspecting exception classes.
"""

from __future__ import annotations

from typing import Any


class EngineError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "engine_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class UnknownItemError(EngineError):
    """An item id is not part of the catalog."""

    code = "unknown_item"

    def __init__(self, item: str):
        super().__init__(f"unknown item id: {item!r}", item=item)


class ItemNotInSpaceError(EngineError):
    """An operation referenced an item outside the presented choice space."""

    code = "item_not_in_space"

    def __init__(self, item: str):
        super().__init__(f"item {item!r} is not in the choice space", item=item)


class EmptySpaceError(EngineError):
    """Choice spaces must be non-empty."""

    code = "empty_space"

    def __init__(self, message: str = "choice space must be non-empty"):
        super().__init__(message)


class SpacesNotNestedError(EngineError):
    """Outcome classification only compares nested spaces (add or subtract items)."""

    code = "spaces_not_nested"

    def __init__(self):
        super().__init__("spaces are not nested: one must contain the other")


class PoolTooLargeError(EngineError):
    """Exhaustive subset enumeration was requested beyond the pool cap."""

    code = "pool_too_large"

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"pool of {size} items exceeds the enumeration cap of {cap}; "
            "use greedy_tipping_set for an approximate answer",
            size=size,
            cap=cap,
        )


class ValidationError(EngineError):
    """A precondition on arguments was violated."""

    code = "invalid_argument"


class NotFoundError(EngineError):
    """A referenced session, choice set or observation does not exist."""

    code = "not_found"
