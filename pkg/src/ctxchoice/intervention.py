"""The two avoidance methods: transparent warnings and adaptive choice sets.

Warnings are pure renderings of detector evidence; the directive
(CONFIRM, INFORM, HIGHLIGHT) tells the caller how to surface them but
never blocks anything by itself. Adaptive generation composes an
offered set so the predicted winner matches the preference being
protected, steering around risky constellations and suspect items.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from typing import Any, Iterable, Mapping

from . import kernels
from .config import DEFAULT_CONFIG
from .detector import Flag, RegretEvidence, SuspectReport, flag_inconsistency, regret_risk
from .errors import ValidationError
from .learner import ChoiceLog, MatrixEstimate, Observation
from .model import ItemId


class WarningKind(enum.Enum):
    PREVALENT_INCONSISTENCY = "PREVALENT_INCONSISTENCY"
    REGRET_RISK = "REGRET_RISK"
    SUSPECT_ITEM = "SUSPECT_ITEM"


class Directive(enum.Enum):
    CONFIRM = "CONFIRM"
    INFORM = "INFORM"
    HIGHLIGHT = "HIGHLIGHT"


def _load_templates() -> dict[str, str]:
    ref = resources.files("ctxchoice").joinpath("data/warning_templates.json")
    return json.loads(ref.read_text())


_TEMPLATES = _load_templates()


@dataclass(frozen=True)
class Warning:
    """A typed, rendered intervention message with its evidence attached."""

    kind: WarningKind
    message: str
    subject: tuple[ItemId, ...]
    evidence: Mapping[str, Any]
    directive: Directive

    def __post_init__(self):
        if not self.message:
            raise ValidationError("warning message must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "message": self.message,
            "subject": list(self.subject),
            "evidence": dict(self.evidence),
            "directive": self.directive.value,
        }


def _labeler(labels: Mapping[ItemId, str] | None):
    return (lambda i: labels.get(i, i)) if labels else (lambda i: i)


def compose_warning(
    evidence: Flag | RegretEvidence | SuspectReport,
    labels: Mapping[ItemId, str] | None = None,
) -> Warning:
    """Render detector evidence into its canonical warning.

    Same evidence always renders to byte-identical text. Dominance
    flags ask for confirmation, regret evidence informs, suspect
    reports highlight the item.
    """
    name = _labeler(labels)
    if isinstance(evidence, Flag):
        stats = evidence.stats
        message = _TEMPLATES["PREVALENT_INCONSISTENCY"].format(
            chosen=name(evidence.chosen),
            dominant=name(evidence.dominant),
            n_dominant=round(stats.share_p * stats.n_together),
            n_together=stats.n_together,
        )
        return Warning(
            kind=WarningKind.PREVALENT_INCONSISTENCY,
            message=message,
            subject=(evidence.dominant, evidence.chosen),
            evidence=evidence.to_dict(),
            directive=Directive.CONFIRM,
        )
    if isinstance(evidence, RegretEvidence):
        record = evidence.record
        message = _TEMPLATES["REGRET_RISK"].format(
            n_retracted=record.n_retracted, n_seen=record.n_seen, risk=evidence.risk
        )
        return Warning(
            kind=WarningKind.REGRET_RISK,
            message=message,
            subject=record.fingerprint,
            evidence={
                "risk": evidence.risk,
                "n_seen": record.n_seen,
                "n_retracted": record.n_retracted,
                "space": list(record.fingerprint),
            },
            directive=Directive.INFORM,
        )
    if isinstance(evidence, SuspectReport):
        message = _TEMPLATES["SUSPECT_ITEM"].format(
            item=name(evidence.item), n_users=evidence.n_users, lift=evidence.lift
        )
        return Warning(
            kind=WarningKind.SUSPECT_ITEM,
            message=message,
            subject=(evidence.item,),
            evidence=evidence.to_dict(),
            directive=Directive.HIGHLIGHT,
        )
    raise ValidationError(f"cannot compose a warning from {type(evidence).__name__}")


def predicted_reversal_warning(
    flag: Flag, labels: Mapping[ItemId, str] | None = None
) -> Warning:
    """Pre-choice variant of the dominance warning (informs, does not confirm).

    Used at offer time when the predicted pick from the offered set
    would already contradict a dominant preference.
    """
    name = _labeler(labels)
    stats = flag.stats
    message = _TEMPLATES["PREDICTED_REVERSAL"].format(
        chosen=name(flag.chosen),
        dominant=name(flag.dominant),
        n_dominant=round(stats.share_p * stats.n_together),
        n_together=stats.n_together,
    )
    return Warning(
        kind=WarningKind.PREVALENT_INCONSISTENCY,
        message=message,
        subject=(flag.dominant, flag.chosen),
        evidence={**flag.to_dict(), "predicted": True},
        directive=Directive.INFORM,
    )


@dataclass(frozen=True)
class DetectorContext:
    """History the adaptive generator steers around."""

    log: ChoiceLog | None = None
    suspects: frozenset = frozenset()


@dataclass(frozen=True)
class AdaptationPlan:
    """A generated choice set with its safety report."""

    choice_set: tuple[ItemId, ...]
    predicted_winner: ItemId
    safety: Mapping[str, Any]
    alternatives_considered: int

    def __post_init__(self):
        if self.predicted_winner not in self.choice_set:
            raise ValidationError("predicted winner must be inside the choice set")

    def to_dict(self) -> dict[str, Any]:
        return {
            "choice_set": list(self.choice_set),
            "predicted_winner": self.predicted_winner,
            "safety": dict(self.safety),
            "alternatives_considered": self.alternatives_considered,
        }


def adapt_choice_set(
    estimate: MatrixEstimate,
    pool: Iterable[ItemId],
    k: int,
    required: Iterable[ItemId] = (),
    protect: ItemId | None = None,
    detector_context: DetectorContext | None = None,
    rho_max: float = DEFAULT_CONFIG.rho_max,
    cap: int = DEFAULT_CONFIG.pool_cap,
) -> AdaptationPlan:
    """Compose a size-k offer whose predicted winner serves the user.

    Enumerates every size-k subset of the pool containing the required
    items. Candidates are discarded when their regret risk exceeds
    rho_max, when they contain suspect items that were not explicitly
    required, or (with ``protect``) when the predicted winner is not
    the protected item. Among survivors the winner's top-two utility
    margin is maximized: a wide margin is what keeps the protected
    choice stable under estimate error. Ties prefer fewer suspect
    items, then the earliest set in catalog order. If nothing survives,
    the least-bad candidate is returned with every violated criterion
    spelled out in the safety report.
    """
    ctx = detector_context or DetectorContext()
    cat = estimate.matrix.catalog
    pool_ids = frozenset(pool)
    required_ids = frozenset(required)
    for item in pool_ids | required_ids:
        cat.index(item)
    if not required_ids <= pool_ids:
        raise ValidationError("required items must be part of the pool")
    if not len(required_ids) <= k <= len(pool_ids):
        raise ValidationError(
            f"k={k} out of range [{len(required_ids)}, {len(pool_ids)}]"
        )
    if len(pool_ids) > cap:
        raise ValidationError(f"pool of {len(pool_ids)} exceeds the enumeration cap {cap}")
    if protect is not None and protect not in pool_ids:
        raise ValidationError("protected item must be part of the pool")

    entries = estimate.matrix.entries
    free = [i for i in cat.sort_space(pool_ids) if i not in required_ids]
    required_sorted = tuple(cat.sort_space(required_ids)) if required_ids else ()

    candidates = []
    for extra in combinations(free, k - len(required_ids)):
        members = tuple(cat.sort_space(required_ids | set(extra)))
        idx = cat.space_indices(members)
        j = kernels.best_index(entries, idx)
        winner = cat.items[int(idx[j])]
        if len(idx) == 1:
            margin = math.inf
        else:
            utilities = kernels.space_utilities(entries, idx)
            top = utilities[j]
            second = max(u for t, u in enumerate(utilities) if t != j)
            margin = float(top - second)
        risk = regret_risk(ctx.log, members) if ctx.log is not None else 0.5
        unsanctioned = tuple(i for i in members if i in ctx.suspects and i not in required_ids)
        suspects_in = tuple(i for i in members if i in ctx.suspects)
        violations = []
        if risk > rho_max:
            violations.append("regret_risk")
        if unsanctioned:
            violations.append("suspect_items")
        if protect is not None and winner != protect:
            violations.append("protect")
        candidates.append(
            {
                "members": members,
                "idx_key": tuple(int(i) for i in idx),
                "winner": winner,
                "margin": margin,
                "risk": risk,
                "suspects_in": suspects_in,
                "violations": violations,
            }
        )

    safe = [c for c in candidates if not c["violations"]]
    ranked_pool = safe if safe else candidates
    ranked = sorted(
        ranked_pool,
        key=lambda c: (
            len(c["violations"]),
            -c["margin"],
            len(c["suspects_in"]),
            c["idx_key"],
        ),
    )
    pick = ranked[0]
    inconsistency_safe = protect is None or pick["winner"] == protect
    if inconsistency_safe and ctx.log is not None:
        hypothetical = Observation(space=frozenset(pick["members"]), chosen=pick["winner"])
        inconsistency_safe = (
            flag_inconsistency(ctx.log, hypothetical, cat) is None
        )

    safety = {
        "regret_risk": pick["risk"],
        "suspects_included": list(pick["suspects_in"]),
        "inconsistency_safe": inconsistency_safe,
        "violations": list(pick["violations"]),
    }
    return AdaptationPlan(
        choice_set=pick["members"],
        predicted_winner=pick["winner"],
        safety=safety,
        alternatives_considered=len(candidates),
    )
