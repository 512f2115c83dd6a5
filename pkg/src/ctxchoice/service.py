"""Stateful HTTP facade over the engine.

One session per user: an append-only JSONL log on disk is the source
of truth, the estimate and all detector output are recomputed from it,
so a session rebuilt from its files is indistinguishable from the live
one. Mutations to a session are serialized by a per-session lock;
distinct sessions never share state beyond the cross-session
suspect-item scan.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import DEFAULT_CONFIG, EngineConfig
from .detector import (
    detector_report,
    flag_inconsistency,
    regret_evidence,
    suspect_items,
)
from .errors import EngineError, NotFoundError, ValidationError
from .intervention import (
    DetectorContext,
    adapt_choice_set,
    compose_warning,
    predicted_reversal_warning,
)
from .learner import (
    ChoiceLog,
    MatrixEstimate,
    Observation,
    constraints_from_log,
    estimate_matrix,
    predict_choice,
)
from .model import Catalog, ItemId, UtilityMatrix, best_choice, utility_table


@dataclass
class SessionState:
    id: str
    catalog: Catalog
    config: EngineConfig
    log: ChoiceLog
    estimate: MatrixEstimate
    pending: dict[str, tuple[ItemId, ...]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    next_choice_set: int = 1


class SessionStore:
    """Disk-backed session registry: a manifest plus a JSONL log per session."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()

    def _manifest_path(self, sid: str) -> Path:
        return self.data_dir / f"{sid}.json"

    def _log_path(self, sid: str) -> Path:
        return self.data_dir / f"{sid}.jsonl"

    def create(
        self,
        catalog_items: list[str],
        labels: Mapping[str, str] | None = None,
        config: Mapping[str, Any] | None = None,
        defaults: EngineConfig = DEFAULT_CONFIG,
    ) -> SessionState:
        catalog = Catalog(tuple(catalog_items), labels=labels)
        merged = dict(defaults.to_dict())
        merged.update(config or {})
        cfg = EngineConfig.from_dict(merged)
        sid = uuid.uuid4().hex[:12]
        state = SessionState(
            id=sid,
            catalog=catalog,
            config=cfg,
            log=ChoiceLog(user=sid),
            estimate=estimate_matrix([], catalog, bounds=cfg.bounds),
        )
        manifest = {
            "id": sid,
            "catalog": list(catalog.items),
            "labels": dict(labels) if labels else None,
            "config": cfg.to_dict(),
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        self._manifest_path(sid).write_text(json.dumps(manifest, indent=2) + "\n")
        self._log_path(sid).write_text("")
        with self._lock:
            self._sessions[sid] = state
        return state

    def get(self, sid: str) -> SessionState:
        with self._lock:
            state = self._sessions.get(sid)
        if state is not None:
            return state
        state = self._load(sid)
        with self._lock:
            return self._sessions.setdefault(sid, state)

    def _load(self, sid: str) -> SessionState:
        path = self._manifest_path(sid)
        if not path.exists():
            raise NotFoundError(f"unknown session {sid!r}")
        manifest = json.loads(path.read_text())
        catalog = Catalog(tuple(manifest["catalog"]), labels=manifest.get("labels"))
        cfg = EngineConfig.from_dict(manifest.get("config"))
        log_path = self._log_path(sid)
        log = ChoiceLog.load(log_path, user=sid) if log_path.exists() else ChoiceLog(user=sid)
        return SessionState(
            id=sid,
            catalog=catalog,
            config=cfg,
            log=log,
            estimate=estimate_matrix(
                constraints_from_log(log, catalog, cfg), catalog, bounds=cfg.bounds
            ),
        )

    def session_ids(self) -> list[str]:
        ids = {p.stem for p in self.data_dir.glob("*.json")}
        with self._lock:
            ids.update(self._sessions)
        return sorted(ids)

    def all_logs(self) -> dict[str, ChoiceLog]:
        return {sid: self.get(sid).log for sid in self.session_ids()}

    def append_observation(self, state: SessionState, obs: Observation) -> int:
        index = state.log.append(obs)
        with self._log_path(state.id).open("a") as f:
            f.write(json.dumps(obs.to_dict()) + "\n")
        self._refresh(state)
        return index

    def retract_observation(self, state: SessionState, index: int) -> Observation:
        obs = state.log.retract(index)
        # the retracted flag lives inside the observation line, so the
        # whole file is rewritten atomically; ordering never changes
        tmp = self._log_path(state.id).with_suffix(".jsonl.tmp")
        tmp.write_text(state.log.to_jsonl())
        os.replace(tmp, self._log_path(state.id))
        self._refresh(state)
        return obs

    def _refresh(self, state: SessionState) -> None:
        state.estimate = estimate_matrix(
            constraints_from_log(state.log, state.catalog, state.config),
            state.catalog,
            bounds=state.config.bounds,
        )


def _offer_warnings(
    store: SessionStore, state: SessionState, items: tuple[ItemId, ...]
) -> list[dict]:
    """Pre-choice warnings for an offered set: suspect highlights, regret
    informs, and a predicted-reversal inform when the expected pick
    already contradicts a dominant preference."""
    cfg = state.config
    labels = state.catalog.labels
    warnings = []
    suspects = suspect_items(
        store.all_logs(),
        state.catalog,
        min_users=cfg.min_users,
        min_lift=cfg.min_lift,
        theta=cfg.theta,
        min_support=cfg.dominance_min_support,
    )
    for report in suspects:
        if report.item in items:
            warnings.append(compose_warning(report, labels).to_dict())

    evidence = regret_evidence(state.log, items)
    if evidence.record.n_retracted >= 1 and evidence.risk > cfg.rho_max:
        warnings.append(compose_warning(evidence, labels).to_dict())

    predicted, _ = predict_choice(state.estimate, items)
    flag = flag_inconsistency(
        state.log,
        Observation(space=frozenset(items), chosen=predicted),
        state.catalog,
        theta=cfg.theta,
        min_support=cfg.dominance_min_support,
    )
    if flag is not None:
        warnings.append(predicted_reversal_warning(flag, labels).to_dict())
    return warnings


def _choice_warnings(
    store: SessionStore, state: SessionState, items: tuple[ItemId, ...], chosen: ItemId
) -> list[dict]:
    """Warnings for a concrete (possibly dry-run) pick."""
    cfg = state.config
    labels = state.catalog.labels
    warnings = []
    flag = flag_inconsistency(
        state.log,
        Observation(space=frozenset(items), chosen=chosen),
        state.catalog,
        theta=cfg.theta,
        min_support=cfg.dominance_min_support,
    )
    if flag is not None:
        warnings.append(compose_warning(flag, labels).to_dict())

    evidence = regret_evidence(state.log, items)
    if evidence.record.n_retracted >= 1 and evidence.risk > cfg.rho_max:
        warnings.append(compose_warning(evidence, labels).to_dict())

    suspects = suspect_items(
        store.all_logs(),
        state.catalog,
        min_users=cfg.min_users,
        min_lift=cfg.min_lift,
        theta=cfg.theta,
        min_support=cfg.dominance_min_support,
    )
    for report in suspects:
        if report.item == chosen:
            warnings.append(compose_warning(report, labels).to_dict())
    return warnings


def create_app(
    data_dir: str | Path = "./ctxchoice-data",
    defaults: EngineConfig = DEFAULT_CONFIG,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ctxchoice session service", version="1")
    store = SessionStore(data_dir)
    app.state.store = store

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = 404 if isinstance(exc, NotFoundError) else 400
        return JSONResponse(status_code=status, content=exc.to_dict())

    def _body_items(state: SessionState, raw: list) -> tuple[ItemId, ...]:
        if not isinstance(raw, list) or not raw:
            raise ValidationError("items must be a non-empty list of ids")
        return state.catalog.sort_space(raw)

    @app.post("/v1/sessions")
    async def create_session(body: dict):
        catalog = body.get("catalog")
        if not catalog or not isinstance(catalog, list):
            raise ValidationError("catalog must be a non-empty list of item ids")
        try:
            state = store.create(
                catalog,
                labels=body.get("labels"),
                config=body.get("config"),
                defaults=defaults,
            )
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        return {"session_id": state.id, "config": state.config.to_dict()}

    @app.post("/v1/sessions/{sid}/choice-sets")
    async def offer_choice_set(sid: str, body: dict):
        state = store.get(sid)
        explicit = body.get("items") is not None
        adaptive = body.get("pool") is not None
        if explicit == adaptive:
            raise ValidationError("provide either items or pool/k, not both")
        with state.lock:
            plan_doc = None
            if explicit:
                items = _body_items(state, body["items"])
            else:
                pool = _body_items(state, body["pool"])
                if "k" not in body:
                    raise ValidationError("adaptive offers need k")
                suspects = suspect_items(
                    store.all_logs(),
                    state.catalog,
                    min_users=state.config.min_users,
                    min_lift=state.config.min_lift,
                    theta=state.config.theta,
                    min_support=state.config.dominance_min_support,
                )
                plan = adapt_choice_set(
                    state.estimate,
                    pool,
                    int(body["k"]),
                    required=body.get("required", ()),
                    protect=body.get("protect"),
                    detector_context=DetectorContext(
                        log=state.log,
                        suspects=frozenset(s.item for s in suspects),
                    ),
                    rho_max=float(body.get("rho_max", state.config.rho_max)),
                    cap=state.config.pool_cap,
                )
                items = plan.choice_set
                plan_doc = plan.to_dict()
            warnings = _offer_warnings(store, state, items)
            cs_id = f"cs-{state.next_choice_set}"
            state.next_choice_set += 1
            state.pending[cs_id] = items
        payload: dict[str, Any] = {
            "choice_set_id": cs_id,
            "items": list(items),
            "warnings": warnings,
        }
        if plan_doc is not None:
            payload["plan"] = plan_doc
        return payload

    @app.post("/v1/sessions/{sid}/choices")
    async def submit_choice(sid: str, body: dict):
        state = store.get(sid)
        cs_id = body.get("choice_set_id")
        chosen = body.get("chosen")
        commit = bool(body.get("commit", False))
        with state.lock:
            if cs_id not in state.pending:
                raise NotFoundError(f"unknown or expired choice set {cs_id!r}")
            items = state.pending[cs_id]
            if chosen not in items:
                raise ValidationError(f"chosen item {chosen!r} is not in the offered set")
            warnings = _choice_warnings(store, state, items, chosen)
            payload: dict[str, Any] = {"warnings": warnings, "committed": False}
            if commit:
                rating = body.get("rating")
                if rating is not None and not (
                    isinstance(rating, (int, float)) and rating > 0
                ):
                    raise ValidationError("rating must be a positive number")
                obs = Observation(
                    space=frozenset(items),
                    chosen=chosen,
                    at=datetime.now(timezone.utc).isoformat(),
                    context_free_rating=rating,
                )
                index = store.append_observation(state, obs)
                del state.pending[cs_id]
                payload["committed"] = True
                payload["observation"] = index
        return payload

    @app.post("/v1/sessions/{sid}/retractions")
    async def retract_choice(sid: str, body: dict):
        state = store.get(sid)
        index = body.get("observation")
        if not isinstance(index, int):
            raise ValidationError("observation must be an integer index")
        with state.lock:
            if not 0 <= index < len(state.log):
                raise NotFoundError(f"no observation at index {index}")
            store.retract_observation(state, index)
        return {"ok": True, "observation": index}

    @app.get("/v1/sessions/{sid}/estimate")
    async def get_estimate(sid: str):
        state = store.get(sid)
        with state.lock:
            return state.estimate.to_dict()

    @app.get("/v1/sessions/{sid}/report")
    async def get_report(sid: str):
        state = store.get(sid)
        with state.lock:
            report = detector_report(
                {state.id: state.log}, state.catalog, state.config
            )
            # suspect detection is only meaningful across users, so it
            # scans every session in the store
            suspects = suspect_items(
                store.all_logs(),
                state.catalog,
                min_users=state.config.min_users,
                min_lift=state.config.min_lift,
                theta=state.config.theta,
                min_support=state.config.dominance_min_support,
            )
            report["suspects"] = [s.to_dict() for s in suspects]
        return report

    @app.get("/v1/sessions/{sid}/history")
    async def get_history(sid: str):
        state = store.get(sid)
        with state.lock:
            return {
                "observations": [
                    {**obs.to_dict(), "index": i}
                    for i, obs in enumerate(state.log.observations)
                ]
            }

    @app.post("/v1/analyze")
    async def analyze(body: dict):
        # stateless helper for the console's sandbox view: all utility
        # math stays on the server
        try:
            matrix = UtilityMatrix.from_dict(body.get("matrix", {}))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix document: {exc}") from None
        space = body.get("space")
        if not space:
            raise ValidationError("space must be a non-empty list of item ids")
        table = utility_table(matrix, space)
        return {
            "table": table,
            "winner": best_choice(matrix, space),
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app


def resolve_service_settings(
    config_path: str | None = None,
    port: int | None = None,
    data_dir: str | None = None,
    static_dir: str | None = None,
) -> dict[str, Any]:
    """Service settings: config file < environment < explicit flags."""
    settings: dict[str, Any] = {
        "port": 8000,
        "data_dir": "./ctxchoice-data",
        "static_dir": None,
        "defaults": DEFAULT_CONFIG,
    }
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read service config {config_path}: {exc}") from None
        settings["port"] = int(doc.get("port", settings["port"]))
        settings["data_dir"] = doc.get("data_dir", settings["data_dir"])
        settings["static_dir"] = doc.get("static_dir", settings["static_dir"])
        if doc.get("defaults"):
            settings["defaults"] = EngineConfig.from_dict(doc["defaults"])
    if os.environ.get("CTXCHOICE_PORT"):
        settings["port"] = int(os.environ["CTXCHOICE_PORT"])
    if os.environ.get("CTXCHOICE_DATA_DIR"):
        settings["data_dir"] = os.environ["CTXCHOICE_DATA_DIR"]
    if port is not None:
        settings["port"] = port
    if data_dir is not None:
        settings["data_dir"] = data_dir
    if static_dir is not None:
        settings["static_dir"] = static_dir
    return settings
