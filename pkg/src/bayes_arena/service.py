"""HTTP/JSON session service: play the druid, watch its reasoning, retrain.

Sessions are independent and live in process memory. Within a session every
mutating request runs under the session lock, so concurrent clients observe
consistent before/after states; pure reads never tick the world.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .infer import joint_posterior, select_action, skill_given_target, target_posterior
from .learning import NoDataError, extract_records, fit
from .model import ModelParams, SkillModel, TargetModel, build_skill_model, build_target_model, models_to_json, rebuild_at_roster_size
from .prob import AllZeroError
from .sim import (
    BadScenarioError,
    EpisodeLog,
    World,
    load_scenario,
    read_log,
    replay,
)

TOP_TARGETS_SHOWN = 3
TOP_PAIRS_SHOWN = 10


@dataclass
class Session:
    id: str
    world: World
    model_id: str
    tm: TargetModel
    sm: SkillModel
    log: EpisodeLog
    lock: threading.Lock = field(default_factory=threading.Lock)
    replay_ok: Optional[bool] = None

    @property
    def status(self) -> str:
        return "running" if self.world.outcome() is None else "finished"


class Registry:
    """Process-wide session and model stores."""

    def __init__(self, scenario_dir: Optional[str] = None):
        self.scenario_dir = scenario_dir
        self.sessions: dict[str, Session] = {}
        self.models: dict[str, dict] = {}
        self.lock = threading.Lock()
        params = ModelParams()
        self.models["default"] = {
            "id": "default",
            "params": params,
            "records": None,
            "report": None,
        }

    def build_models(self, model_id: str, n: int) -> tuple[TargetModel, SkillModel]:
        entry = self.models[model_id]
        params = entry["params"]
        return build_target_model(params, n), build_skill_model(params)


def _session_or_404(registry: Registry, session_id: str) -> Session:
    session = registry.sessions.get(session_id)
    if session is None:
        raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
    return session


def _state_doc(session: Session) -> dict:
    world = session.world
    snapshot = world.snapshot() if world.alive_entities() else None
    druid = world.druid() if any(e.id == world.druid_id for e in world.entities) else None
    legal = (
        world.legal_actions(world.druid_id)
        if session.status == "running" and druid is not None
        else []
    )
    doc = {
        "session": session.id,
        "tick": world.tick,
        "status": session.status,
        "outcome": world.outcome(),
        "model": session.model_id,
        "prev_target": world.prev_target,
        "characters": [],
        "druid": None,
        "legal": [list(pair) for pair in legal],
    }
    if session.replay_ok is not None:
        doc["replay_ok"] = session.replay_ok
    if snapshot is not None:
        derived = {c.id: c for c in snapshot.characters}
        for e in world.alive_entities():
            c = derived[e.id]
            doc["characters"].append(
                {
                    "id": e.id,
                    "ally": e.ally,
                    "class": e.cls,
                    "resists": e.resists,
                    "hp": e.hp,
                    "hp_max": e.hp_max,
                    "distance_m": e.distance_m,
                    "hp_level": c.hp_level,
                    "distance": c.distance,
                    "delta_hp": c.delta_hp,
                    "imminent_death": c.imminent_death,
                }
            )
    if druid is not None and druid.alive():
        doc["druid"] = {
            "id": druid.id,
            "mana": druid.mana,
            "mana_max": druid.mana_max,
            "cooldowns": dict(sorted(druid.cooldowns.items())),
        }
    return doc


def _posterior_doc(session: Session) -> dict:
    world = session.world
    snapshot = world.snapshot()
    tm = rebuild_at_roster_size(session.tm, len(snapshot.characters))
    tdist = target_posterior(tm, snapshot)
    ranked = joint_posterior(tm, session.sm, snapshot)
    order = sorted(
        range(len(snapshot.ids)), key=lambda i: (-tdist.probs[i], i)
    )
    top_targets = [snapshot.ids[i] for i in order[:TOP_TARGETS_SHOWN]]
    skills_by_target = {}
    for target in top_targets:
        try:
            skills_by_target[target] = skill_given_target(
                session.sm, snapshot, target
            ).as_dict()
        except AllZeroError:
            skills_by_target[target] = None
    legal = world.legal_actions(world.druid_id) if session.status == "running" else []
    return {
        "targets": list(snapshot.ids),
        "target_probs": tdist.as_dict(),
        "top_targets": top_targets,
        "skills_by_target": skills_by_target,
        "top_pairs": [
            {"target": t, "skill": s, "prob": p}
            for t, s, p in ranked.entries[:TOP_PAIRS_SHOWN]
        ],
        "legal": [list(pair) for pair in legal],
    }


def _finish_check(session: Session) -> None:
    """On episode end, close the log and verify it replays to this state."""
    if session.world.outcome() is None:
        return
    if session.replay_ok is not None:
        return
    session.log.outcome = session.world.outcome()
    session.log.final_state = session.world.state_digest()
    try:
        replay(session.log, strict=True)
        session.replay_ok = True
    except Exception:
        session.replay_ok = False


def _record(session: Session, snapshot, actor, action, legal, events) -> None:
    session.log.records.append(
        {
            "tick": session.world.tick - 1,
            "snapshot": snapshot.to_json(),
            "actor": actor,
            "action": None if action is None else
                {"skill": action[0], "target": action[1]},
            "legal": [list(pair) for pair in legal],
            "events": events,
        }
    )


def create_app(static_dir: Optional[str] = None, scenario_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="bayes-arena", version="0.1.0")
    registry = Registry(scenario_dir=scenario_dir)
    app.state.registry = registry

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        scenario_ref = body.get("scenario", "A")
        seed = int(body.get("seed", 0))
        model_id = body.get("model", "default")
        if model_id not in registry.models:
            raise HTTPException(status_code=422, detail=f"unknown model {model_id!r}")
        try:
            if isinstance(scenario_ref, dict):
                scenario = load_scenario(scenario_ref)
            elif scenario_ref in ("A", "B"):
                scenario = load_scenario(scenario_ref)
            elif registry.scenario_dir:
                import os

                path = os.path.join(registry.scenario_dir, f"{scenario_ref}.json")
                scenario = load_scenario(path)
            else:
                raise BadScenarioError(f"unknown scenario {scenario_ref!r}")
            world = World(scenario, seed=seed)
        except (BadScenarioError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        n = len(world.alive_entities())
        tm, sm = registry.build_models(model_id, n)
        session = Session(
            id=uuid.uuid4().hex[:12],
            world=world,
            model_id=model_id,
            tm=tm,
            sm=sm,
            log=EpisodeLog(scenario=world.scenario, seed=seed, policy="session"),
        )
        with registry.lock:
            registry.sessions[session.id] = session
        return {"id": session.id, "state": _state_doc(session)}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = _session_or_404(registry, session_id)
        return _state_doc(session)

    @app.get("/sessions/{session_id}/posterior")
    def get_posterior(session_id: str):
        session = _session_or_404(registry, session_id)
        if not session.world.alive_entities():
            raise HTTPException(status_code=410, detail="session finished")
        return _posterior_doc(session)

    @app.post("/sessions/{session_id}/action")
    def apply_human_action(session_id: str, body: dict = Body(...)):
        session = _session_or_404(registry, session_id)
        with session.lock:
            if session.status != "running":
                raise HTTPException(status_code=410, detail="session finished")
            skill = body.get("skill")
            target = body.get("target")
            world = session.world
            snapshot = world.snapshot()
            legal = world.legal_actions(world.druid_id)
            if (skill, target) not in legal:
                raise HTTPException(
                    status_code=409,
                    detail=f"({skill}, {target}) is not currently legal",
                )
            events = world.apply_action(world.druid_id, skill, target)
            world.prev_target = target
            events += world.tick_once()
            _record(session, snapshot, "human", (skill, target), legal, events)
            _finish_check(session)
            return {"events": events, "state": _state_doc(session)}

    @app.post("/sessions/{session_id}/bot-step")
    def bot_step(session_id: str, body: dict = Body(default={})):
        session = _session_or_404(registry, session_id)
        mode = (body or {}).get("mode", "argmax")
        if mode not in ("argmax", "sample"):
            raise HTTPException(status_code=422, detail=f"unknown mode {mode!r}")
        with session.lock:
            if session.status != "running":
                raise HTTPException(status_code=410, detail="session finished")
            world = session.world
            snapshot = world.snapshot()
            legal = world.legal_actions(world.druid_id)
            posterior = _posterior_doc(session)
            tm = rebuild_at_roster_size(session.tm, len(snapshot.characters))
            ranked = joint_posterior(tm, session.sm, snapshot)
            legal_pairs = {(t, s) for s, t in legal}
            if mode == "argmax":
                choice = select_action(ranked, lambda t, s: (t, s) in legal_pairs)
            else:
                pairs = [(t, s) for t, s, p in ranked.entries if (t, s) in legal_pairs]
                weights = [p for t, s, p in ranked.entries if (t, s) in legal_pairs]
                if not pairs:
                    choice = None
                else:
                    if sum(weights) <= 0.0:
                        weights = [1.0] * len(pairs)
                    choice = world.rng.choices(pairs, weights=weights, k=1)[0]
            if choice is None:
                events = world.tick_once()
                _record(session, snapshot, "bot", None, legal, events)
                _finish_check(session)
                raise HTTPException(
                    status_code=409,
                    detail={
                        "idle": True,
                        "reason": "no legal action",
                        "posterior": posterior,
                    },
                )
            target, skill = choice
            events = world.apply_action(world.druid_id, skill, target)
            world.prev_target = target
            events += world.tick_once()
            _record(session, snapshot, "bot", (skill, target), legal, events)
            _finish_check(session)
            return {
                "action": {"skill": skill, "target": target},
                "posterior": posterior,
                "events": events,
                "state": _state_doc(session),
            }

    @app.post("/train")
    def train(body: dict = Body(...)):
        session_ids = body.get("sessions", [])
        pseudocount = float(body.get("pseudocount", 1.0))
        inline_logs = body.get("logs", [])
        records = []
        for sid in session_ids:
            session = _session_or_404(registry, sid)
            with session.lock:
                log = EpisodeLog(
                    scenario=session.log.scenario,
                    seed=session.log.seed,
                    policy=session.log.policy,
                    records=list(session.log.records),
                    outcome=session.log.outcome or "timeout",
                    final_state=None,
                )
            records.extend(extract_records(log))
        for text in inline_logs:
            records.extend(_records_from_text(text))
        try:
            tm, sm, report = fit(records, pseudocount)
        except NoDataError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if not records:
            raise HTTPException(status_code=422, detail="no decision records")
        model_id = f"m-{uuid.uuid4().hex[:8]}"
        with registry.lock:
            registry.models[model_id] = {
                "id": model_id,
                "params": tm.params,
                "records": report.records,
                "report": report.to_json(),
            }
        return {"model": model_id, "report": report.to_json()}

    @app.get("/models")
    def list_models():
        with registry.lock:
            return [
                {"id": m["id"], "records": m["records"]}
                for m in registry.models.values()
            ]

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        entry = registry.models.get(model_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        tm, sm = registry.build_models(model_id, 7)
        return models_to_json(tm, sm)

    @app.get("/sessions/{session_id}/log")
    def download_log(session_id: str):
        session = _session_or_404(registry, session_id)
        with session.lock:
            log = session.log
            buf = io.StringIO()
            header = {"scenario": log.scenario, "seed": log.seed, "policy": log.policy}
            buf.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
            for record in log.records:
                buf.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            terminal = {
                "outcome": log.outcome or session.world.outcome() or "timeout",
                "final_state": log.final_state,
            }
            buf.write(json.dumps(terminal, sort_keys=True, separators=(",", ":")) + "\n")
        return PlainTextResponse(buf.getvalue(), media_type="application/jsonl")

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _records_from_text(text: str):
    """Parse an uploaded JSONL log body into decision records (via replay)."""
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as f:
        f.write(text)
        path = f.name
    try:
        return extract_records(read_log(path))
    finally:
        import os

        os.unlink(path)
