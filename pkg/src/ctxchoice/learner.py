"""Learning matrix entries from logged selections.

Each recorded selection pins down linear inequalities over the matrix
entries: the chosen item's in-context utility beats every other offered
item's. Repeated near-50/50 selections in one space soften the
corresponding pair of strict inequalities into an equality band, and
context-free ratings pin diagonal entries. A max-margin linear program
then picks a canonical matrix from the feasible region, or reports the
least-violating matrix when the data is inconsistent.

Absolute scale is unidentifiable from choices alone, so the first
catalog item's stand-alone utility is pinned to 1.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .config import DEFAULT_CONFIG, EngineConfig
from .errors import ValidationError
from .model import Catalog, ChoiceSpace, ItemId, UtilityMatrix, utility_table

_TOL = 1e-9


@dataclass(frozen=True)
class Observation:
    """One recorded selection: the offered space and what was picked."""

    space: frozenset
    chosen: ItemId
    at: str = "1970-01-01T00:00:00"
    retracted: bool = False
    context_free_rating: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "space", frozenset(self.space))
        if self.chosen not in self.space:
            raise ValidationError(
                f"chosen item {self.chosen!r} is not in the offered space"
            )
        try:
            datetime.fromisoformat(self.at.replace("Z", "+00:00"))
        except ValueError:
            raise ValidationError(f"bad timestamp {self.at!r}, want ISO-8601") from None

    def timestamp(self) -> datetime:
        return datetime.fromisoformat(self.at.replace("Z", "+00:00"))

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "space": sorted(self.space),
            "chosen": self.chosen,
            "at": self.at,
            "retracted": self.retracted,
        }
        if self.context_free_rating is not None:
            doc["rating"] = self.context_free_rating
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Observation":
        return cls(
            space=frozenset(doc["space"]),
            chosen=doc["chosen"],
            at=doc.get("at", "1970-01-01T00:00:00"),
            retracted=bool(doc.get("retracted", False)),
            context_free_rating=doc.get("rating"),
        )


class ChoiceLog:
    """Append-only sequence of one user's observations."""

    def __init__(self, user: str = "anonymous", observations: Iterable[Observation] = ()):
        self.user = user
        self.observations: list[Observation] = []
        for obs in observations:
            self.append(obs)

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    def append(self, obs: Observation) -> int:
        """Append and return the observation's index. Timestamps must not decrease."""
        if self.observations and obs.timestamp() < self.observations[-1].timestamp():
            raise ValidationError("observation timestamps must be non-decreasing")
        self.observations.append(obs)
        return len(self.observations) - 1

    def retract(self, index: int) -> Observation:
        """Mark an observation retracted; double retraction is an error."""
        if not 0 <= index < len(self.observations):
            raise ValidationError(f"no observation at index {index}")
        obs = self.observations[index]
        if obs.retracted:
            raise ValidationError(f"observation {index} is already retracted")
        updated = replace(obs, retracted=True)
        self.observations[index] = updated
        return updated

    def prefix(self, end: int) -> "ChoiceLog":
        """A view-copy of the first ``end`` observations (history before index end)."""
        log = ChoiceLog(self.user)
        log.observations = self.observations[:end]
        return log

    def to_jsonl(self) -> str:
        return "".join(json.dumps(o.to_dict()) + "\n" for o in self.observations)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path: str | Path, user: str | None = None) -> "ChoiceLog":
        p = Path(path)
        log = cls(user=user or p.stem)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read log file {path}: {exc}") from None
        for line_no, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                log.append(Observation.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValidationError(f"{path}:{line_no}: bad observation: {exc}") from None
        return log


class Relation(enum.Enum):
    GREATER = "GREATER"
    EQUAL_WITHIN = "EQUAL_WITHIN"


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse linear constraint over matrix entries.

    GREATER means coeffs . A > rhs (strict); EQUAL_WITHIN means
    |coeffs . A - rhs| <= epsilon.
    """

    coefficients: tuple[tuple[tuple[int, int], float], ...]
    relation: Relation
    rhs: float = 0.0
    epsilon: float | None = None
    provenance: Any = field(default=None, compare=False)

    def __post_init__(self):
        if not any(v != 0.0 for _, v in self.coefficients):
            raise ValidationError("constraint needs at least one nonzero coefficient")
        if self.relation is Relation.EQUAL_WITHIN and (
            self.epsilon is None or self.epsilon < 0
        ):
            raise ValidationError("EQUAL_WITHIN requires a non-negative epsilon")

    def value(self, entries: np.ndarray) -> float:
        return float(sum(v * entries[r, c] for (r, c), v in self.coefficients))

    def slack(self, entries: np.ndarray) -> float:
        """Positive slack means satisfied; for equalities, distance to the band edge."""
        dev = self.value(entries) - self.rhs
        if self.relation is Relation.GREATER:
            return dev
        return float(self.epsilon) - abs(dev)

    def satisfied(self, entries: np.ndarray, tol: float = _TOL) -> bool:
        if self.relation is Relation.GREATER:
            return self.slack(entries) > tol
        return self.slack(entries) >= -tol

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "coefficients": [[r, c, v] for (r, c), v in self.coefficients],
            "relation": self.relation.value,
            "rhs": self.rhs,
        }
        if self.epsilon is not None:
            doc["epsilon"] = self.epsilon
        if self.provenance is not None:
            doc["provenance"] = self.provenance
        return doc


def _utility_row(catalog: Catalog, item: ItemId, idx: Sequence[int]) -> dict[tuple[int, int], float]:
    row = catalog.index(item)
    return {(row, int(i)): 1.0 for i in idx}


def _difference_coeffs(
    catalog: Catalog, preferred: ItemId, other: ItemId, idx: Sequence[int]
) -> tuple[tuple[tuple[int, int], float], ...]:
    coeffs = _utility_row(catalog, preferred, idx)
    for cell, v in _utility_row(catalog, other, idx).items():
        coeffs[cell] = coeffs.get(cell, 0.0) - v
    return tuple(sorted(coeffs.items()))


def constraints_from_observation(
    obs: Observation,
    catalog: Catalog,
    anchor_rating: float | None = None,
    epsilon_diag: float = DEFAULT_CONFIG.epsilon_diag,
) -> list[LinearConstraint]:
    """Strict inequalities implied by one selection.

    A choice from a space of N items yields exactly N-1 constraints:
    the chosen row's in-space sum beats each other offered row's.
    Singletons yield none. Retracted observations are rejected here;
    their ratings are still harvested by constraints_from_log.
    """
    if obs.retracted:
        raise ValidationError("retracted observations carry no preference constraint")
    idx = catalog.space_indices(obs.space)
    out: list[LinearConstraint] = []
    space_ids = [catalog.items[int(i)] for i in idx]
    for other in space_ids:
        if other == obs.chosen:
            continue
        out.append(
            LinearConstraint(
                coefficients=_difference_coeffs(catalog, obs.chosen, other, idx),
                relation=Relation.GREATER,
                rhs=0.0,
                provenance={
                    "kind": "choice",
                    "space": space_ids,
                    "chosen": obs.chosen,
                    "over": other,
                    "at": obs.at,
                },
            )
        )
    if obs.context_free_rating is not None and anchor_rating is not None:
        out.append(ingest_rating(obs, catalog, anchor_rating, epsilon=epsilon_diag))
    return out


def ingest_rating(
    obs: Observation,
    catalog: Catalog,
    anchor_rating: float,
    epsilon: float = DEFAULT_CONFIG.epsilon_diag,
) -> LinearConstraint:
    """Pin the chosen item's diagonal entry near rating / anchor_rating.

    The first rating ever seen acts as the anchor, so the anchor item's
    diagonal lands near 1, consistent with the a[first,first] = 1
    normalization.
    """
    rating = obs.context_free_rating
    if rating is None or rating <= 0:
        raise ValidationError(f"context-free rating must be positive, got {rating!r}")
    if anchor_rating <= 0:
        raise ValidationError("anchor rating must be positive")
    k = catalog.index(obs.chosen)
    return LinearConstraint(
        coefficients=(((k, k), 1.0),),
        relation=Relation.EQUAL_WITHIN,
        rhs=float(rating) / float(anchor_rating),
        epsilon=epsilon,
        provenance={
            "kind": "rating",
            "item": obs.chosen,
            "rating": rating,
            "anchor": anchor_rating,
            "at": obs.at,
        },
    )


def frequency_equalities(
    log: ChoiceLog,
    catalog: Catalog,
    min_support: int = DEFAULT_CONFIG.freq_min_support,
    near_tie_band: float = DEFAULT_CONFIG.near_tie_band,
    epsilon: float = DEFAULT_CONFIG.epsilon_eq,
) -> list[LinearConstraint]:
    """Near-tie equalities from repeated selections in the same space.

    A space seen at least ``min_support`` times whose two most-chosen
    items split close to 50/50 yields an equality band between those
    items' in-space utilities. Downstream these supersede the two
    items' mutual strict constraints from that space (see
    constraints_from_log).
    """
    if min_support < 2:
        raise ValidationError("min_support must be at least 2")
    groups: dict[frozenset, list[Observation]] = {}
    for obs in log:
        if not obs.retracted:
            groups.setdefault(obs.space, []).append(obs)

    out: list[LinearConstraint] = []
    for space in sorted(groups, key=lambda s: tuple(catalog.sort_space(s))):
        group = groups[space]
        if len(group) < min_support:
            continue
        counts: dict[ItemId, int] = {}
        for obs in group:
            counts[obs.chosen] = counts.get(obs.chosen, 0) + 1
        ranked = sorted(counts.items(), key=lambda e: (-e[1], catalog.index(e[0])))
        if len(ranked) < 2:
            continue
        (top, c1), (runner, c2) = ranked[0], ranked[1]
        share = c1 / (c1 + c2)
        if abs(share - 0.5) > near_tie_band:
            continue
        idx = catalog.space_indices(space)
        out.append(
            LinearConstraint(
                coefficients=_difference_coeffs(catalog, top, runner, idx),
                relation=Relation.EQUAL_WITHIN,
                rhs=0.0,
                epsilon=epsilon,
                provenance={
                    "kind": "frequency",
                    "space": list(catalog.sort_space(space)),
                    "items": [top, runner],
                    "share": share,
                    "support": len(group),
                },
            )
        )
    return out


def constraints_from_log(
    log: ChoiceLog,
    catalog: Catalog,
    config: EngineConfig = DEFAULT_CONFIG,
) -> list[LinearConstraint]:
    """Full constraint set for a log: choices, ratings, near-tie equalities.

    The first positive rating in the log anchors the rating scale.
    Retracted observations contribute their rating (a context-free
    datum) but never a preference constraint. Equalities supersede the
    tied pair's mutual strict constraints from the same space.
    """
    anchor: float | None = None
    for obs in log:
        if obs.context_free_rating is not None and obs.context_free_rating > 0:
            anchor = float(obs.context_free_rating)
            break

    choice_constraints: list[LinearConstraint] = []
    rating_constraints: list[LinearConstraint] = []
    for obs in log:
        if not obs.retracted:
            choice_constraints.extend(
                c
                for c in constraints_from_observation(
                    obs, catalog, anchor_rating=None
                )
            )
        if obs.context_free_rating is not None and anchor is not None:
            rating_constraints.append(
                ingest_rating(obs, catalog, anchor, epsilon=config.epsilon_diag)
            )

    equalities = frequency_equalities(
        log,
        catalog,
        min_support=config.freq_min_support,
        near_tie_band=config.near_tie_band,
        epsilon=config.epsilon_eq,
    )
    superseded: set[tuple[frozenset, frozenset]] = set()
    for eq in equalities:
        prov = eq.provenance
        superseded.add((frozenset(prov["space"]), frozenset(prov["items"])))

    kept = []
    for c in choice_constraints:
        prov = c.provenance
        key = (frozenset(prov["space"]), frozenset((prov["chosen"], prov["over"])))
        if key in superseded:
            continue
        kept.append(c)
    return kept + rating_constraints + equalities


@dataclass(frozen=True)
class ViolatedConstraint:
    constraint: LinearConstraint
    slack: float

    def to_dict(self) -> dict[str, Any]:
        return {**self.constraint.to_dict(), "slack": self.slack}


@dataclass(frozen=True)
class MatrixEstimate:
    """A feasible (or least-violating) matrix plus slack diagnostics."""

    matrix: UtilityMatrix
    margin: float
    violated: tuple[ViolatedConstraint, ...] = ()

    def __post_init__(self):
        if self.margin > 0 and self.violated:
            raise ValidationError("positive margin cannot coexist with violations")

    def to_dict(self) -> dict[str, Any]:
        doc = self.matrix.to_dict()
        doc["margin"] = self.margin
        doc["violated"] = [v.to_dict() for v in self.violated]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "MatrixEstimate":
        matrix = UtilityMatrix.from_dict(doc)
        # violated constraints are diagnostics; they do not round-trip
        return cls(matrix=matrix, margin=float(doc.get("margin", 0.0)))


def default_estimate(catalog: Catalog, bounds: float = DEFAULT_CONFIG.bounds) -> MatrixEstimate:
    """Prior used before any data: unit diagonal, zero cross terms."""
    entries = np.eye(len(catalog), dtype=np.float64)
    return MatrixEstimate(matrix=UtilityMatrix(catalog, entries), margin=float(bounds))


def estimate_matrix(
    constraints: Sequence[LinearConstraint],
    catalog: Catalog,
    bounds: float = DEFAULT_CONFIG.bounds,
) -> MatrixEstimate:
    """Max-margin feasible point of the constraint region.

    Maximizes the minimum slack t over all strict constraints, subject
    to every equality band, the first diagonal pinned at 1, and box
    bounds on every entry. The margin is capped at ``bounds`` so an
    empty or weak constraint set reports a finite margin. If t comes
    out non-positive, or the equality bands are jointly infeasible, the
    least-violating matrix is returned with the violated constraints
    listed.
    """
    if bounds <= 0:
        raise ValidationError("bounds must be positive")
    n = len(catalog)
    if not constraints:
        return default_estimate(catalog, bounds)

    unique: list[LinearConstraint] = []
    seen = set()
    for c in constraints:
        key = (c.coefficients, c.relation, c.rhs, c.epsilon)
        if key not in seen:
            seen.add(key)
            unique.append(c)

    solution = _solve_max_margin(unique, n, bounds)
    if solution is None:
        solution = _solve_least_violation(unique, n, bounds)
    x, margin = solution

    matrix = UtilityMatrix(catalog, x.reshape(n, n))
    violated: tuple[ViolatedConstraint, ...] = ()
    if margin <= _TOL:
        violated = tuple(
            ViolatedConstraint(c, c.slack(matrix.entries))
            for c in constraints
            if not c.satisfied(matrix.entries)
        )
        if violated:
            margin = min(margin, 0.0)
    return MatrixEstimate(matrix=matrix, margin=float(margin), violated=violated)


def _pack_row(c: LinearConstraint, n: int, sign: float) -> np.ndarray:
    row = np.zeros(n * n, dtype=np.float64)
    for (r, col), v in c.coefficients:
        row[r * n + col] += sign * v
    return row


def _solve_max_margin(
    constraints: Sequence[LinearConstraint], n: int, bounds: float
) -> tuple[np.ndarray, float] | None:
    """Phase A: hard equality bands, maximize the minimum strict slack."""
    nvar = n * n
    rows, rhs = [], []
    for c in constraints:
        if c.relation is Relation.GREATER:
            row = np.zeros(nvar + 1)
            row[:nvar] = _pack_row(c, n, -1.0)
            row[nvar] = 1.0  # t
            rows.append(row)
            rhs.append(-c.rhs)
        else:
            eps = float(c.epsilon)
            up = np.zeros(nvar + 1)
            up[:nvar] = _pack_row(c, n, 1.0)
            rows.append(up)
            rhs.append(c.rhs + eps)
            down = np.zeros(nvar + 1)
            down[:nvar] = _pack_row(c, n, -1.0)
            rows.append(down)
            rhs.append(-(c.rhs - eps))

    cvec = np.zeros(nvar + 1)
    cvec[nvar] = -1.0  # maximize t
    var_bounds = [(-bounds, bounds)] * nvar + [(None, bounds)]
    var_bounds[0] = (1.0, 1.0)  # normalization: first diagonal entry is 1
    res = linprog(
        cvec, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=var_bounds, method="highs"
    )
    if res.status == 2:  # equality bands conflict
        return None
    if res.status != 0:
        raise RuntimeError(f"matrix estimation LP failed unexpectedly: {res.message}")
    return res.x[:nvar], float(res.x[nvar])


def _solve_least_violation(
    constraints: Sequence[LinearConstraint], n: int, bounds: float
) -> tuple[np.ndarray, float]:
    """Phase B: uniform relaxation v of every constraint, minimized."""
    nvar = n * n
    rows, rhs = [], []
    for c in constraints:
        if c.relation is Relation.GREATER:
            row = np.zeros(nvar + 1)
            row[:nvar] = _pack_row(c, n, -1.0)
            row[nvar] = -1.0  # -v
            rows.append(row)
            rhs.append(-c.rhs)
        else:
            eps = float(c.epsilon)
            up = np.zeros(nvar + 1)
            up[:nvar] = _pack_row(c, n, 1.0)
            up[nvar] = -1.0
            rows.append(up)
            rhs.append(c.rhs + eps)
            down = np.zeros(nvar + 1)
            down[:nvar] = _pack_row(c, n, -1.0)
            down[nvar] = -1.0
            rows.append(down)
            rhs.append(-(c.rhs - eps))

    cvec = np.zeros(nvar + 1)
    cvec[nvar] = 1.0  # minimize v
    var_bounds = [(-bounds, bounds)] * nvar + [(0.0, None)]
    var_bounds[0] = (1.0, 1.0)
    res = linprog(
        cvec, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=var_bounds, method="highs"
    )
    if res.status != 0:
        raise RuntimeError(f"relaxed estimation LP failed unexpectedly: {res.message}")
    return res.x[:nvar], -float(res.x[nvar])


def predict_choice(estimate: MatrixEstimate, space: ChoiceSpace) -> tuple[ItemId, float]:
    """Predicted pick plus a confidence in [0, 1] from the top-two margin."""
    table = utility_table(estimate.matrix, space)
    items = list(table)
    if len(items) == 1:
        return items[0], 1.0
    ranked = sorted(table.items(), key=lambda e: (-e[1], estimate.matrix.catalog.index(e[0])))
    (winner, u1), (_, u2) = ranked[0], ranked[1]
    margin = u1 - u2
    if margin <= 0.0:
        return winner, 0.0
    denom = max(abs(u1), abs(u2))
    return winner, min(1.0, margin / denom) if denom > 0 else 1.0
