"""Threshold bundle shared by the learner, detector, intervention and service.

None of these values come from first principles; they are operating
points. Everything is overridable per call or per session.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping


@dataclass(frozen=True)
class EngineConfig:
    # dominance-inconsistency detection
    theta: float = 0.9
    dominance_min_support: int = 5
    # suspect-item detection
    min_users: int = 3
    min_lift: float = 2.0
    # frequency-based equalities
    freq_min_support: int = 20
    near_tie_band: float = 0.05
    epsilon_eq: float = 0.05
    # context-free rating constraints
    epsilon_diag: float = 0.1
    # matrix estimation
    bounds: float = 100.0
    # subset enumeration
    pool_cap: int = 16
    # adaptive choice sets / regret warnings
    rho_max: float = 0.6

    def __post_init__(self):
        if not 0.5 < self.theta <= 1.0:
            raise ValueError("theta must be in (0.5, 1]")
        if self.dominance_min_support < 1:
            raise ValueError("dominance_min_support must be >= 1")
        if self.min_users < 2:
            raise ValueError("min_users must be >= 2")
        if self.min_lift <= 1.0:
            raise ValueError("min_lift must be > 1")
        if self.bounds <= 0:
            raise ValueError("bounds must be positive")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "EngineConfig":
        if not data:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(data))


DEFAULT_CONFIG = EngineConfig()
