"""Synthetic choosers and end-to-end evaluation loops.

Generates ground-truth matrices and choice logs from seeded chooser
models, then closes the loop: fit an estimate from the synthetic log
and measure how faithfully it reproduces the training choices and the
truth's held-out choices, or plant known dominance violations and
measure detector precision/recall against the plant.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from math import comb
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, EngineConfig
from .detector import flagged_indices, suspect_items
from .errors import ValidationError
from .learner import (
    ChoiceLog,
    Observation,
    constraints_from_log,
    estimate_matrix,
    predict_choice,
)
from .model import Catalog, ChoiceSpace, ItemId, UtilityMatrix, best_choice, utility_table

def _stamp(i: int) -> str:
    # deterministic, strictly increasing, good enough for synthetic logs
    minutes, seconds = divmod(i, 60)
    hours, minutes = divmod(minutes, 60)
    return f"2026-01-01T{hours:02d}:{minutes:02d}:{seconds:02d}"


def sample_matrix(n: int, seed: int, sparsity: float = 0.5) -> UtilityMatrix:
    """Random ground-truth matrix: diagonal in (1, 10], off-diagonals zero
    with probability ``sparsity``, otherwise uniform in [-5, 15].

    The draw order (diagonal, zero mask, values) is fixed so a seed
    fully determines the matrix.
    """
    if n < 2:
        raise ValidationError("need at least two items")
    if not 0.0 <= sparsity <= 1.0:
        raise ValidationError("sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    diag = 10.0 - rng.uniform(0.0, 9.0, size=n)
    zero_mask = rng.random((n, n)) < sparsity
    values = rng.uniform(-5.0, 15.0, size=(n, n))
    entries = np.where(zero_mask, 0.0, values)
    np.fill_diagonal(entries, diag)
    catalog = Catalog(tuple(f"i{j + 1}" for j in range(n)))
    return UtilityMatrix(catalog, entries)


@dataclass(frozen=True)
class ChooserModel:
    """A synthetic user: a truth matrix plus a choice policy.

    DETERMINISTIC picks the in-context argmax. SOFTMAX samples
    proportional to exp(utility / tau) and exists to generate the
    near-tie frequencies the equality learner needs; it is not a claim
    about real users. A choice is retracted with probability rho when
    the picked item ranks worse stand-alone (by diagonal) than it
    ranked in context, the signature of a context-inflated pick.
    """

    truth: UtilityMatrix
    policy: str = "deterministic"
    tau: float | None = None
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.policy not in ("deterministic", "softmax"):
            raise ValidationError(f"unknown policy {self.policy!r}")
        if self.policy == "softmax" and not (self.tau and self.tau > 0):
            raise ValidationError("softmax needs tau > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValidationError("rho must lie in [0, 1]")


def _rank(ordering: Sequence[ItemId], item: ItemId) -> int:
    return ordering.index(item) + 1


def simulate_session(model: ChooserModel, spaces: Iterable[ChoiceSpace]) -> ChoiceLog:
    """One observation per space, reproducible from the model seed."""
    rng = np.random.default_rng(model.seed)
    truth = model.truth
    cat = truth.catalog
    log = ChoiceLog(user=f"sim-{model.seed}")
    diag = truth.diagonal()

    for i, space in enumerate(spaces):
        ids = cat.sort_space(space)
        if model.policy == "deterministic":
            chosen = best_choice(truth, ids)
        else:
            table = utility_table(truth, ids)
            u = np.array([table[item] for item in ids])
            z = u / model.tau
            z -= z.max()
            p = np.exp(z)
            p /= p.sum()
            chosen = ids[int(rng.choice(len(ids), p=p))]

        retracted = False
        if model.rho > 0.0:
            table = utility_table(truth, ids)
            ctx_order = sorted(ids, key=lambda x: (-table[x], cat.index(x)))
            free_order = sorted(ids, key=lambda x: (-diag[x], cat.index(x)))
            if _rank(free_order, chosen) > _rank(ctx_order, chosen):
                retracted = bool(rng.random() < model.rho)

        log.append(
            Observation(
                space=frozenset(ids), chosen=chosen, at=_stamp(i), retracted=retracted
            )
        )
    return log


def random_spaces(
    catalog: Catalog,
    count: int,
    seed: int,
    min_size: int = 2,
    max_size: int | None = None,
    exclude: Iterable[frozenset] = (),
) -> list[frozenset]:
    """Random subsets of the catalog (repeats allowed, exclusions honored)."""
    n = len(catalog)
    max_size = min(max_size or n, n)
    if not 1 <= min_size <= max_size:
        raise ValidationError("bad space size range")
    rng = np.random.default_rng(seed)
    banned = set(exclude)
    out: list[frozenset] = []
    attempts = 0
    limit = 200 * count + 1000
    while len(out) < count:
        attempts += 1
        if attempts > limit:
            raise ValidationError(
                "exclusions leave too few distinct spaces to sample from"
            )
        size = int(rng.integers(min_size, max_size + 1))
        picked = rng.choice(n, size=size, replace=False)
        space = frozenset(catalog.items[int(i)] for i in picked)
        if space in banned:
            continue
        out.append(space)
    return out


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one evaluation run; fractions are None when not applicable."""

    training_consistency: float | None = None
    heldout_accuracy: float | None = None
    heldout_count: int = 0
    margin: float | None = None
    flags_precision: float | None = None
    flags_recall: float | None = None
    n_flags: int = 0
    suspect_top: ItemId | None = None
    runtime_s: float = 0.0
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("training_consistency", "heldout_accuracy", "flags_precision", "flags_recall"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "training_consistency": self.training_consistency,
            "heldout_accuracy": self.heldout_accuracy,
            "heldout_count": self.heldout_count,
            "margin": self.margin,
            "flags_precision": self.flags_precision,
            "flags_recall": self.flags_recall,
            "n_flags": self.n_flags,
            "suspect_top": self.suspect_top,
            "runtime_s": self.runtime_s,
            "counts": dict(self.counts),
        }


def evaluate_learner(
    truth: UtilityMatrix,
    train_spaces: Sequence[ChoiceSpace],
    heldout_spaces: Sequence[ChoiceSpace],
    seed: int = 0,
    config: EngineConfig = DEFAULT_CONFIG,
) -> ExperimentReport:
    """Simulate deterministic sessions on the training spaces, fit, report.

    Training consistency must be 1.0 whenever the fit has positive
    margin; held-out accuracy is reported as-is (the feasible region
    need not pin down entries the training spaces never exercised).
    An empty held-out list reports accuracy 1.0 with count 0.
    """
    t0 = time.perf_counter()
    train = [frozenset(s) for s in train_spaces]
    heldout = [frozenset(s) for s in heldout_spaces]
    if set(train) & set(heldout):
        raise ValidationError("train and held-out spaces must be disjoint as sets")

    model = ChooserModel(truth=truth, policy="deterministic", seed=seed)
    log = simulate_session(model, train)
    constraints = constraints_from_log(log, truth.catalog, config)
    estimate = estimate_matrix(constraints, truth.catalog, bounds=config.bounds)

    agree = sum(
        1 for obs in log if predict_choice(estimate, obs.space)[0] == obs.chosen
    )
    training_consistency = agree / len(log) if len(log) else 1.0

    if heldout:
        hits = sum(
            1
            for s in heldout
            if predict_choice(estimate, s)[0] == best_choice(truth, s)
        )
        heldout_accuracy = hits / len(heldout)
    else:
        heldout_accuracy = 1.0

    return ExperimentReport(
        training_consistency=training_consistency,
        heldout_accuracy=heldout_accuracy,
        heldout_count=len(heldout),
        margin=estimate.margin,
        runtime_s=time.perf_counter() - t0,
        counts={
            "observations": len(log),
            "constraints": len(constraints),
        },
    )


@dataclass(frozen=True)
class DetectorPlant:
    """Script for constructing logs with known violations.

    Each of ``users`` gets ``dominance_repeats`` choices of
    ``dominant`` from {dominant, runner_up}, then (when planted) one
    violating choice of ``runner_up`` from the violation space, which
    may carry the suspect item. Controls are extra consistent picks.
    """

    catalog: Catalog
    users: int = 5
    dominant: ItemId = "P"
    runner_up: ItemId = "Q"
    dominance_repeats: int = 10
    violation_space: frozenset | None = None
    control_spaces: tuple = ()

    def __post_init__(self):
        for item in (self.dominant, self.runner_up):
            self.catalog.index(item)
        if self.dominant == self.runner_up:
            raise ValidationError("dominant and runner-up must differ")
        if self.users < 1:
            raise ValidationError("need at least one user")
        if self.violation_space is not None:
            vs = frozenset(self.violation_space)
            if not {self.dominant, self.runner_up} <= vs:
                raise ValidationError("violation space must contain the dominance pair")
            for item in vs:
                self.catalog.index(item)
            object.__setattr__(self, "violation_space", vs)

    def build_logs(self) -> tuple[dict[str, ChoiceLog], dict[str, list[int]]]:
        """Per-user logs plus the indices of planted violations."""
        logs: dict[str, ChoiceLog] = {}
        planted: dict[str, list[int]] = {}
        pair = frozenset((self.dominant, self.runner_up))
        for u in range(self.users):
            user = f"user{u + 1}"
            log = ChoiceLog(user=user)
            t = 0
            for _ in range(self.dominance_repeats):
                log.append(Observation(space=pair, chosen=self.dominant, at=_stamp(t)))
                t += 1
            for space in self.control_spaces:
                ids = frozenset(space)
                chosen = sorted(ids)[0]
                log.append(Observation(space=ids, chosen=chosen, at=_stamp(t)))
                t += 1
            marks: list[int] = []
            if self.violation_space is not None:
                marks.append(
                    log.append(
                        Observation(
                            space=self.violation_space,
                            chosen=self.runner_up,
                            at=_stamp(t),
                        )
                    )
                )
            logs[user] = log
            planted[user] = marks
        return logs, planted


def evaluate_detector(
    seed: int,
    plant: DetectorPlant | Mapping[str, Any],
    config: EngineConfig = DEFAULT_CONFIG,
) -> ExperimentReport:
    """Build planted logs and score the detector against the plant.

    Recall is flagged plants over plants; precision is flagged plants
    over all inconsistency flags. Both are None when nothing was
    planted (zero flags is then the expected outcome). The top suspect
    is reported for the suspect-ranking check.
    """
    if isinstance(plant, Mapping):
        plant = _plant_from_dict(plant)
    logs, planted = plant.build_logs()
    t0 = time.perf_counter()

    tp = 0
    n_flags = 0
    n_planted = 0
    for user, log in logs.items():
        flagged = flagged_indices(
            log, plant.catalog, theta=config.theta, min_support=config.dominance_min_support
        )
        inconsistency = {i for i, why in flagged.items() if why == "inconsistency"}
        n_flags += len(inconsistency)
        n_planted += len(planted[user])
        tp += len(inconsistency & set(planted[user]))

    precision = tp / n_flags if n_flags else None
    recall = tp / n_planted if n_planted else None

    suspects = suspect_items(
        logs,
        plant.catalog,
        min_users=config.min_users,
        min_lift=config.min_lift,
        theta=config.theta,
        min_support=config.dominance_min_support,
    )
    return ExperimentReport(
        flags_precision=precision,
        flags_recall=recall,
        n_flags=n_flags,
        suspect_top=suspects[0].item if suspects else None,
        runtime_s=time.perf_counter() - t0,
        counts={
            "users": len(logs),
            "planted": n_planted,
            "observations": sum(len(l) for l in logs.values()),
        },
    )


def _plant_from_dict(doc: Mapping[str, Any]) -> DetectorPlant:
    try:
        catalog = Catalog(tuple(doc["catalog"]))
        plant = DetectorPlant(
            catalog=catalog,
            users=int(doc.get("users", 5)),
            dominant=doc.get("dominant", "P"),
            runner_up=doc.get("runner_up", "Q"),
            dominance_repeats=int(doc.get("dominance_repeats", 10)),
            violation_space=(
                frozenset(doc["violation_space"]) if doc.get("violation_space") else None
            ),
            control_spaces=tuple(frozenset(s) for s in doc.get("control_spaces", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed plant script: {exc}") from None
    return plant


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a simulation run (the CLI's input format)."""

    n: int = 4
    seeds: tuple[int, ...] = (1,)
    sparsity: float = 0.5
    policy: str = "deterministic"
    tau: float | None = None
    rho: float = 0.0
    train_count: int = 100
    heldout_count: int = 10
    min_size: int = 2
    max_size: int | None = None
    spaces: tuple | None = None
    plant: Mapping[str, Any] | None = None
    thresholds: Mapping[str, Any] | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown experiment config keys: {sorted(unknown)}")
        data = dict(doc)
        if "seeds" in data:
            data["seeds"] = tuple(int(s) for s in data["seeds"])
        if "spaces" in data and data["spaces"] is not None:
            data["spaces"] = tuple(frozenset(s) for s in data["spaces"])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(open(path).read())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read experiment config {path}: {exc}") from None
        return cls.from_dict(doc)


def run_experiment(config: ExperimentConfig) -> dict[str, Any]:
    """Run the configured seeds and merge per-seed reports."""
    engine_cfg = EngineConfig.from_dict(config.thresholds)
    rows = []
    for seed in config.seeds:
        truth = sample_matrix(config.n, seed=seed, sparsity=config.sparsity)
        if config.spaces is not None:
            train = list(config.spaces)
            heldout: list[frozenset] = []
        else:
            heldout = list(
                dict.fromkeys(
                    random_spaces(
                        truth.catalog,
                        config.heldout_count,
                        seed=seed + 10_000,
                        min_size=config.min_size,
                        max_size=config.max_size,
                    )
                )
            )
            # leave at least half of the distinct spaces for training
            max_size = min(config.max_size or config.n, config.n)
            total = sum(comb(config.n, r) for r in range(config.min_size, max_size + 1))
            heldout = heldout[: max(1, total // 2)]
            train = random_spaces(
                truth.catalog,
                config.train_count,
                seed=seed,
                min_size=config.min_size,
                max_size=config.max_size,
                exclude=heldout,
            )
        report = evaluate_learner(truth, train, heldout, seed=seed, config=engine_cfg)
        rows.append({"seed": seed, **report.to_dict()})

    detector_row = None
    if config.plant is not None:
        detector_row = evaluate_detector(
            seed=config.seeds[0], plant=config.plant, config=engine_cfg
        ).to_dict()

    def _mean(key: str) -> float | None:
        vals = [r[key] for r in rows if r[key] is not None]
        return sum(vals) / len(vals) if vals else None

    return {
        "config": {
            "n": config.n,
            "seeds": list(config.seeds),
            "sparsity": config.sparsity,
            "policy": config.policy,
            "rho": config.rho,
        },
        "runs": rows,
        "aggregate": {
            "training_consistency": _mean("training_consistency"),
            "heldout_accuracy": _mean("heldout_accuracy"),
            "runtime_s": sum(r["runtime_s"] for r in rows),
        },
        "detector": detector_row,
    }


def summary_table(report: Mapping[str, Any]) -> str:
    """Plain-text table of a run_experiment report."""
    lines = [
        f"{'seed':>6}  {'train_cons':>10}  {'heldout_acc':>11}  {'margin':>10}  {'time_s':>8}",
    ]
    for row in report["runs"]:
        margin = row["margin"]
        lines.append(
            f"{row['seed']:>6}  "
            f"{_fmt(row['training_consistency']):>10}  "
            f"{_fmt(row['heldout_accuracy']):>11}  "
            f"{margin:>10.4f}  "
            f"{row['runtime_s']:>8.3f}"
        )
    agg = report["aggregate"]
    lines.append(
        f"{'mean':>6}  {_fmt(agg['training_consistency']):>10}  "
        f"{_fmt(agg['heldout_accuracy']):>11}  {'':>10}  {agg['runtime_s']:>8.3f}"
    )
    return "\n".join(lines)


def _fmt(v: float | None) -> str:
    return "-" if v is None else f"{v:.3f}"
