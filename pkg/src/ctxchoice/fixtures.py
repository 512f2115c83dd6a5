"""Bundled demo matrices (the in-car POI scenario at various cross-gain levels)."""

from __future__ import annotations

import json
from importlib import resources

from .errors import ValidationError
from .model import UtilityMatrix

FIXTURE_NAMES = ("table1", "table4", "table5", "table6", "table7")


def load_fixture(name: str) -> UtilityMatrix:
    if name not in FIXTURE_NAMES:
        raise ValidationError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    ref = resources.files("ctxchoice").joinpath(f"data/matrices/{name}.json")
    return UtilityMatrix.from_dict(json.loads(ref.read_text()))
