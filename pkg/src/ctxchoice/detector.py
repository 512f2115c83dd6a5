"""Heuristics for spotting undesirable preference reversals in choice logs.

Three read-only analytics over immutable log snapshots: dominance
inconsistency (a pick that contradicts a prevalent pairwise
preference), regret risk (smoothed retraction rate of a choice-set
fingerprint, with pairwise backoff), and suspect items (items whose
presence is associated with flagged events across many users). None of
these is a verdict of irrationality; they surface evidence and leave
policy to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Mapping

from .config import DEFAULT_CONFIG, EngineConfig
from .errors import EmptySpaceError, ValidationError
from .learner import ChoiceLog, Observation
from .model import Catalog, ChoiceSpace, ItemId


@dataclass(frozen=True)
class PairwiseStats:
    """How often p beats q when both are offered and one of them is picked."""

    p: ItemId
    q: ItemId
    n_together: int
    share_p: float

    def __post_init__(self):
        if not 0.0 <= self.share_p <= 1.0:
            raise ValidationError("share_p must lie in [0, 1]")
        if self.n_together < 0:
            raise ValidationError("n_together must be non-negative")


@dataclass(frozen=True)
class ConstellationRecord:
    """Exact-set fingerprint of a choice space with its retraction counts."""

    fingerprint: tuple[ItemId, ...]
    n_seen: int
    n_retracted: int

    def __post_init__(self):
        if self.n_retracted > self.n_seen:
            raise ValidationError("retracted count cannot exceed seen count")


@dataclass(frozen=True)
class RegretEvidence:
    """Constellation record plus the smoothed risk derived from it."""

    record: ConstellationRecord
    risk: float


@dataclass(frozen=True)
class Flag:
    """A selection that contradicts a prevalent pairwise preference."""

    dominant: ItemId
    chosen: ItemId
    space: frozenset
    stats: PairwiseStats

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "PREVALENT_INCONSISTENCY",
            "dominant": self.dominant,
            "chosen": self.chosen,
            "space": sorted(self.space),
            "evidence": {
                "n_together": self.stats.n_together,
                "share_dominant": self.stats.share_p,
            },
        }


@dataclass(frozen=True)
class SuspectReport:
    """An item associated with flagged events across enough distinct users."""

    item: ItemId
    n_users: int
    lift: float

    def __post_init__(self):
        if self.n_users < 0 or self.lift < 0:
            raise ValidationError("suspect counts must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {"item": self.item, "n_users": self.n_users, "lift": self.lift}


def pairwise_stats(log: ChoiceLog, p: ItemId, q: ItemId) -> PairwiseStats:
    """Dominance counts for the pair: only observations where both were
    offered and one of them was actually chosen count; retracted
    observations never do. No co-decisions means share 0 by convention.
    """
    if p == q:
        raise ValidationError("pairwise stats need two distinct items")
    n_together = 0
    n_p = 0
    for obs in log:
        if obs.retracted:
            continue
        if p in obs.space and q in obs.space and obs.chosen in (p, q):
            n_together += 1
            if obs.chosen == p:
                n_p += 1
    share = n_p / n_together if n_together else 0.0
    return PairwiseStats(p=p, q=q, n_together=n_together, share_p=share)


def flag_inconsistency(
    log: ChoiceLog,
    obs: Observation,
    catalog: Catalog,
    theta: float = DEFAULT_CONFIG.theta,
    min_support: int = DEFAULT_CONFIG.dominance_min_support,
) -> Flag | None:
    """Flag ``obs`` if it picks against a sufficiently dominant co-offered item.

    Fires when some other offered item p historically wins against the
    chosen item at share >= theta over at least min_support
    co-decisions. Of several qualifying items, the highest share wins,
    ties by catalog order.
    """
    if not 0.5 < theta <= 1.0:
        raise ValidationError("theta must be in (0.5, 1]")
    best: Flag | None = None
    best_key: tuple[float, int] | None = None
    for p in catalog.sort_space(obs.space):
        if p == obs.chosen:
            continue
        stats = pairwise_stats(log, p, obs.chosen)
        if stats.n_together >= min_support and stats.share_p >= theta:
            key = (-stats.share_p, catalog.index(p))
            if best_key is None or key < best_key:
                best_key = key
                best = Flag(dominant=p, chosen=obs.chosen, space=obs.space, stats=stats)
    return best


def constellation_record(log: ChoiceLog, space: ChoiceSpace) -> ConstellationRecord:
    """Seen/retracted counts for the exact choice-set fingerprint."""
    ids = frozenset(space)
    if not ids:
        raise EmptySpaceError()
    n_seen = 0
    n_retracted = 0
    for obs in log:
        if obs.space == ids:
            n_seen += 1
            if obs.retracted:
                n_retracted += 1
    return ConstellationRecord(
        fingerprint=tuple(sorted(ids)), n_seen=n_seen, n_retracted=n_retracted
    )


def _laplace(retracted: int, seen: int) -> float:
    return (retracted + 1) / (seen + 2)


def regret_risk(log: ChoiceLog, space: ChoiceSpace) -> float:
    """Smoothed probability that a choice from this set gets retracted.

    Exact fingerprint first; unseen fingerprints back off to the mean
    of pairwise retraction rates over item pairs in the space; with no
    pairs or no data at all this degrades to the 0.5 prior.
    """
    record = constellation_record(log, space)
    if record.n_seen > 0:
        return _laplace(record.n_retracted, record.n_seen)
    ids = sorted(record.fingerprint)
    pairs = list(combinations(ids, 2))
    if not pairs:
        return 0.5
    rates = []
    for a, b in pairs:
        seen = 0
        retracted = 0
        for obs in log:
            if a in obs.space and b in obs.space:
                seen += 1
                if obs.retracted:
                    retracted += 1
        rates.append(_laplace(retracted, seen))
    return sum(rates) / len(rates)


def regret_evidence(log: ChoiceLog, space: ChoiceSpace) -> RegretEvidence:
    return RegretEvidence(
        record=constellation_record(log, space), risk=regret_risk(log, space)
    )


def flagged_indices(
    log: ChoiceLog,
    catalog: Catalog,
    theta: float = DEFAULT_CONFIG.theta,
    min_support: int = DEFAULT_CONFIG.dominance_min_support,
) -> dict[int, str]:
    """Flagged events in a log: index -> reason.

    An observation is flagged when it was retracted, or when it
    contradicted a dominance pattern in the history before it (each
    observation is judged against its own prefix, matching what a live
    session would have seen at the time).
    """
    out: dict[int, str] = {}
    for i, obs in enumerate(log.observations):
        if obs.retracted:
            out[i] = "retraction"
            continue
        flag = flag_inconsistency(
            log.prefix(i), obs, catalog, theta=theta, min_support=min_support
        )
        if flag is not None:
            out[i] = "inconsistency"
    return out


def suspect_items(
    logs: Mapping[str, ChoiceLog],
    catalog: Catalog,
    min_users: int = DEFAULT_CONFIG.min_users,
    min_lift: float = DEFAULT_CONFIG.min_lift,
    theta: float = DEFAULT_CONFIG.theta,
    min_support: int = DEFAULT_CONFIG.dominance_min_support,
) -> list[SuspectReport]:
    """Items whose presence is associated with flagged events across users.

    Flagged events are inconsistency flags and retractions. Lift is the
    smoothed flagged-event rate of observations containing the item
    over the rate of observations without it (+1 numerators, +2
    denominators). An item is suspect when its flagged events span at
    least min_users distinct users and lift >= min_lift. Fewer than
    min_users users in the input yields an empty result.
    """
    if min_users < 2:
        raise ValidationError("min_users must be at least 2")
    if min_lift <= 1.0:
        raise ValidationError("min_lift must exceed 1")
    if len(logs) < min_users:
        return []

    per_item_users: dict[ItemId, set[str]] = {}
    n_with: dict[ItemId, int] = {}
    f_with: dict[ItemId, int] = {}
    total_obs = 0
    total_flagged = 0

    for user, log in logs.items():
        flagged = flagged_indices(log, catalog, theta=theta, min_support=min_support)
        for i, obs in enumerate(log.observations):
            total_obs += 1
            hit = i in flagged
            if hit:
                total_flagged += 1
            for item in obs.space:
                n_with[item] = n_with.get(item, 0) + 1
                if hit:
                    f_with[item] = f_with.get(item, 0) + 1
                    per_item_users.setdefault(item, set()).add(user)

    reports = []
    for item in catalog.items:
        users = len(per_item_users.get(item, ()))
        if users < min_users:
            continue
        nw = n_with.get(item, 0)
        fw = f_with.get(item, 0)
        rate_with = _laplace(fw, nw)
        rate_without = _laplace(total_flagged - fw, total_obs - nw)
        lift = rate_with / rate_without
        if lift >= min_lift:
            reports.append(SuspectReport(item=item, n_users=users, lift=lift))
    reports.sort(key=lambda r: (-r.lift, catalog.index(r.item)))
    return reports


def detector_report(
    logs: Mapping[str, ChoiceLog],
    catalog: Catalog,
    config: EngineConfig = DEFAULT_CONFIG,
    space: ChoiceSpace | None = None,
) -> dict[str, Any]:
    """Combined detector output for a set of per-user logs.

    ``space`` selects the constellation for the regret figure; when
    omitted, the most recent observation's space is used (prior 0.5 on
    an empty log). Flags list every flagged observation per user.
    """
    flags = []
    for user in sorted(logs):
        log = logs[user]
        flagged = flagged_indices(
            log, catalog, theta=config.theta, min_support=config.dominance_min_support
        )
        for i in sorted(flagged):
            obs = log.observations[i]
            if flagged[i] == "retraction":
                flags.append(
                    {
                        "type": "RETRACTION",
                        "user": user,
                        "observation": i,
                        "space": sorted(obs.space),
                        "chosen": obs.chosen,
                    }
                )
            else:
                flag = flag_inconsistency(
                    log.prefix(i),
                    obs,
                    catalog,
                    theta=config.theta,
                    min_support=config.dominance_min_support,
                )
                flags.append({**flag.to_dict(), "user": user, "observation": i})

    risk = 0.5
    risk_space: ChoiceSpace | None = space
    if risk_space is None:
        last = None
        for user in sorted(logs):
            log = logs[user]
            if len(log):
                last = log.observations[-1]
        if last is not None:
            risk_space = last.space
    if risk_space is not None:
        merged = ChoiceLog("merged")
        merged.observations = [obs for user in sorted(logs) for obs in logs[user]]
        risk = regret_risk(merged, risk_space)

    suspects = suspect_items(
        logs,
        catalog,
        min_users=config.min_users,
        min_lift=config.min_lift,
        theta=config.theta,
        min_support=config.dominance_min_support,
    )
    return {
        "flags": flags,
        "regret_risk": risk,
        "suspects": [s.to_dict() for s in suspects],
    }
