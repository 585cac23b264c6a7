"""Two-player session service.

Serves the referential game to human pairs over HTTP/JSON under
/api/v1/sessions. A session walks lobby -> learning -> practice -> test ->
done, never backwards. Roles are fixed at join time and addressed by opaque
bearer tokens; every trial view is role-scoped, so the speaker never sees
candidates and the listener never sees the target or its program. Browsers
poll trial state (about once a second) and fetch images as PNG.
"""

from __future__ import annotations

import random
import secrets
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import Depends, FastAPI, Header, HTTPException, Response
from pydantic import BaseModel

from .config import RunConfig, default_config
from .engine import TrialRecord, score, validate_message
from .generate import (
    Phase,
    PhaseSpec,
    Question,
    build_phase_set,
    sample_program,
)
from .imgio import png_bytes
from .lang import encode_trinary
from .manifest import records_text
from .render import Image, render_program

ROLES = ("speaker", "listener")
STATES = ("lobby", "learning", "practice", "test", "done")


def edge_gallery(config: RunConfig, size: int) -> list[tuple[str, Image]]:
    """Curated tour of the learning vocabulary: every shape, extreme counts,
    every arrangement, and a few multi-part scenes."""
    vocab = config.vocabs[Phase.PRECONDITIONING]
    shapes = list(vocab.shapes)
    m = encode_trinary(vocab.max_count)
    programs: list[str] = list(shapes)
    first, second = shapes[0], shapes[1 % len(shapes)]
    programs += [
        f"{first}{m}",
        f"{first}*{m}",
        f"{first}{m}*{m}",
        f"{second}2",
        f"{second}*2",
        f"{second}2*2",
    ]
    for i, s in enumerate(shapes):
        other = shapes[(i + 1) % len(shapes)]
        programs.append(f"{s}2+{other}")
        programs.append(f"{s}+{other}*2")
    seen = set()
    out = []
    for text in programs:
        if text in seen:
            continue
        seen.add(text)
        out.append((text, render_program(_parse(text), config.render)))
        if len(out) == size:
            break
    return out


def _parse(text: str):
    from .lang import parse_program

    return parse_program(text)


@dataclass
class Participant:
    role: str
    token: str
    ready: bool = False
    scratchpad: str = ""


@dataclass
class Trial:
    question: Question
    message: str | None = None
    chosen: int | None = None


@dataclass
class Session:
    id: str
    preset: str
    seed: int
    config: RunConfig
    state: str = "lobby"
    participants: dict[str, Participant] = field(default_factory=dict)
    trials: dict[str, list[Trial]] = field(default_factory=dict)
    trial_index: int = 0
    records: list[TrialRecord] = field(default_factory=list)
    last_feedback: dict | None = None
    sandbox_count: int = 0
    lock: threading.RLock = field(default_factory=threading.RLock)

    @property
    def current_trial(self) -> Trial | None:
        if self.state not in ("practice", "test"):
            return None
        trials = self.trials[self.state]
        return trials[self.trial_index] if self.trial_index < len(trials) else None


def _build_session(preset: str, seed: int, config: RunConfig) -> Session:
    sizes = {"human-10/10": (10, 10), "model-100/100": (100, 100)}
    alias = {"human": "human-10/10", "model": "model-100/100"}
    preset = alias.get(preset, preset)
    if preset not in sizes:
        raise HTTPException(422, f"unknown preset {preset!r}")
    n_practice, n_test = sizes[preset]
    session = Session(uuid.uuid4().hex[:12], preset, seed, config)
    for phase, count in ((Phase.PRACTICE, n_practice), (Phase.TEST, n_test)):
        spec = PhaseSpec(
            phase, config.vocabs[phase], config.reference_for(phase), count,
            seed, config.curriculum,
        )
        session.trials[phase.value] = [
            Trial(q) for q in build_phase_set(spec, config.model, config.render)
        ]
    return session


class CreateSession(BaseModel):
    preset: str = "human-10/10"
    seed: int | None = None


class JoinSession(BaseModel):
    role: str


class MessageBody(BaseModel):
    text: str


class SelectionBody(BaseModel):
    choice: int


class ScratchpadBody(BaseModel):
    text: str


def create_app(config: RunConfig | None = None, frontend_dir: str | None = None) -> FastAPI:
    config = config or default_config()
    app = FastAPI(title="shapegame session service")
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()
    gallery = edge_gallery(config, config.gallery_size)

    def get_session(sid: str) -> Session:
        with store_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, "no such session")
        return session

    def authed(sid: str, authorization: str = Header(default="")) -> tuple[Session, Participant]:
        session = get_session(sid)
        token = authorization.removeprefix("Bearer ").strip()
        for participant in session.participants.values():
            if secrets.compare_digest(participant.token, token) and token:
                return session, participant
        raise HTTPException(401, "bad or missing role token")

    def png_response(image: Image) -> Response:
        return Response(png_bytes(image), media_type="image/png")

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/api/v1/sessions")
    def create_session(body: CreateSession):
        seed = body.seed if body.seed is not None else random.SystemRandom().randrange(2**31)
        session = _build_session(body.preset, seed, config)
        with store_lock:
            sessions[session.id] = session
        return {"session_id": session.id, "preset": session.preset}

    @app.get("/api/v1/sessions/{sid}/state")
    def session_state(sid: str):
        session = get_session(sid)
        with session.lock:
            return {
                "state": session.state,
                "joined": sorted(session.participants),
                "trial_index": session.trial_index,
                "trial_counts": {k: len(v) for k, v in session.trials.items()},
            }

    @app.post("/api/v1/sessions/{sid}/join")
    def join(sid: str, body: JoinSession):
        if body.role not in ROLES:
            raise HTTPException(422, f"role must be one of {ROLES}")
        session = get_session(sid)
        with session.lock:
            if body.role in session.participants:
                raise HTTPException(409, f"{body.role} already joined")
            participant = Participant(body.role, secrets.token_hex(16))
            session.participants[body.role] = participant
            if len(session.participants) == 2 and session.state == "lobby":
                session.state = "learning"
            return {"token": participant.token, "role": body.role}

    @app.post("/api/v1/sessions/{sid}/ready")
    def ready(sid: str, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            if session.state != "learning":
                raise HTTPException(409, f"cannot signal ready in {session.state}")
            participant.ready = True
            if all(p.ready for p in session.participants.values()):
                session.state = "practice"
                session.trial_index = 0
            return {"state": session.state}

    @app.get("/api/v1/sessions/{sid}/sandbox/sample")
    def sandbox_sample(sid: str, auth=Depends(authed)):
        session, _ = auth
        with session.lock:
            if session.state != "learning":
                raise HTTPException(409, "sandbox is only open while learning")
            rng = random.Random(f"{session.seed}/sandbox/{session.sandbox_count}")
            session.sandbox_count += 1
            vocab = session.config.vocabs[Phase.PRECONDITIONING]
            program = sample_program(rng, vocab, session.config.model)
            image = render_program(program, session.config.render)
        return png_response(image)

    @app.get("/api/v1/sessions/{sid}/gallery")
    def gallery_index(sid: str, auth=Depends(authed)):
        get_session(sid)
        return {"count": len(gallery)}

    @app.get("/api/v1/sessions/{sid}/gallery/{index}")
    def gallery_item(sid: str, index: int, auth=Depends(authed)):
        get_session(sid)
        if not 0 <= index < len(gallery):
            raise HTTPException(404, "no such gallery item")
        return png_response(gallery[index][1])

    @app.get("/api/v1/sessions/{sid}/trial")
    def trial_view(sid: str, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            view = {
                "state": session.state,
                "role": participant.role,
                "trial_index": session.trial_index,
                "n_trials": len(session.trials.get(session.state, [])),
                "awaiting": None,
                "last_feedback": session.last_feedback
                if session.state == "practice" else None,
            }
            trial = session.current_trial
            if trial is None:
                return view
            view["trial_id"] = trial.question.id
            view["awaiting"] = "message" if trial.message is None else "selection"
            base = f"/api/v1/sessions/{sid}"
            if participant.role == "speaker":
                view["target_image"] = f"{base}/trial/target.png"
                view["message_sent"] = trial.message is not None
            else:
                view["candidates"] = [
                    f"{base}/trial/candidate/{j}.png" for j in range(4)
                ]
                view["message"] = trial.message
            return view

    @app.get("/api/v1/sessions/{sid}/trial/target.png")
    def trial_target(sid: str, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            if participant.role != "speaker":
                raise HTTPException(403, "target is speaker-only")
            trial = session.current_trial
            if trial is None:
                raise HTTPException(409, "no active trial")
            return png_response(trial.question.target_image)

    @app.get("/api/v1/sessions/{sid}/trial/candidate/{index}.png")
    def trial_candidate(sid: str, index: int, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            if participant.role != "listener":
                raise HTTPException(403, "candidates are listener-only")
            trial = session.current_trial
            if trial is None:
                raise HTTPException(409, "no active trial")
            if not 0 <= index < 4:
                raise HTTPException(404, "candidate index out of range")
            return png_response(trial.question.candidates[index])

    @app.post("/api/v1/sessions/{sid}/message")
    def post_message(sid: str, body: MessageBody, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            if participant.role != "speaker":
                raise HTTPException(403, "only the speaker sends messages")
            trial = session.current_trial
            if trial is None:
                raise HTTPException(409, "no active trial")
            if trial.message is not None:
                raise HTTPException(409, "message already sent for this trial")
            violation = validate_message(body.text)
            if violation is not None:
                return {"accepted": False, "violation": violation}
            trial.message = body.text
            return {"accepted": True}

    @app.post("/api/v1/sessions/{sid}/selection")
    def post_selection(sid: str, body: SelectionBody, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            if participant.role != "listener":
                raise HTTPException(403, "only the listener selects")
            trial = session.current_trial
            if trial is None:
                raise HTTPException(409, "no active trial")
            if trial.message is None:
                raise HTTPException(409, "waiting for the speaker's message")
            if not 0 <= body.choice <= 3:
                raise HTTPException(422, "choice must be 0..3")
            trial.chosen = body.choice
            q = trial.question
            record = TrialRecord(
                q.id, q.phase, trial.message, body.choice,
                body.choice == q.correct_index, q.tags,
            )
            session.records.append(record)
            in_practice = session.state == "practice"
            if in_practice:
                session.last_feedback = {
                    "trial_id": q.id,
                    "correct": record.correct,
                    "correct_index": q.correct_index,
                }
            session.trial_index += 1
            if session.trial_index >= len(session.trials[session.state]):
                if in_practice:
                    session.state = "test"
                    session.trial_index = 0
                else:
                    session.state = "done"
            reply = {"recorded": True}
            if in_practice:
                reply["feedback"] = session.last_feedback
            return reply

    @app.get("/api/v1/sessions/{sid}/scratchpad")
    def get_scratchpad(sid: str, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            return {"text": participant.scratchpad}

    @app.put("/api/v1/sessions/{sid}/scratchpad")
    def put_scratchpad(sid: str, body: ScratchpadBody, auth=Depends(authed)):
        session, participant = auth
        with session.lock:
            participant.scratchpad = body.text
            return {"text": participant.scratchpad}

    @app.get("/api/v1/sessions/{sid}/results")
    def results(sid: str, auth=Depends(authed)):
        session, _ = auth
        with session.lock:
            if session.state != "done":
                raise HTTPException(409, "results are available once done")
            out = {"state": session.state, "phases": {}, "scratchpads": {}}
            for phase in (Phase.PRACTICE, Phase.TEST):
                group = [r for r in session.records if r.phase is phase]
                breakdown = score(group)
                out["phases"][phase.value] = _breakdown_dict(breakdown)
            for role, participant in session.participants.items():
                out["scratchpads"][role] = participant.scratchpad
            return out

    @app.get("/api/v1/sessions/{sid}/records")
    def records_download(sid: str, auth=Depends(authed)):
        session, _ = auth
        with session.lock:
            if session.state != "done":
                raise HTTPException(409, "records are available once done")
            return Response(records_text(session.records), media_type="text/plain")

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")
    return app


def _breakdown_dict(breakdown) -> dict:
    def cell(score_):
        return {
            "accuracy": score_.accuracy,
            "correct": score_.correct,
            "total": score_.total,
        }

    return {
        "overall": cell(breakdown.overall),
        "ood_symbol": cell(breakdown.ood_symbol),
        "ood_number": cell(breakdown.ood_number),
        "ood_both": cell(breakdown.ood_both),
    }
