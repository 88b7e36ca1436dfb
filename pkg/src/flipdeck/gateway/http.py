"""HTTP surface: control and query routes, the live tally stream, and the
chat webhook. The gateway holds no state of its own; everything it serves is
derived from the event-sourced application core, so a restart between any
two requests changes no outcome.
"""

from __future__ import annotations

import json
import queue
from typing import Any, Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .. import analytics as an
from ..app import App
from ..bank import BankEntry, EntryStatus
from ..domain import ActorRef, McqQuestion, OpenEndedPrompt, QuestionKind, Role
from ..errors import (
    AlreadyDecided,
    AlreadyVoted,
    DeadlineExpired,
    FlipdeckError,
    PhaseViolation,
    ProviderError,
    StorageFailure,
    Unauthorized,
    UnknownRef,
    ValidationFailure,
    VoteRequired,
)
from ..fip import CUE_TEMPLATES, DigestProvider, ProviderPort
from ..mcq import parse_mcq
from ..routine import QuestionInstance, RoutineSession, SessionConfig
from .chat import ChatAdapter, ChatInbound
from .live import LiveHub

_STATUS: list[tuple[type, int]] = [
    (DeadlineExpired, 410),
    (AlreadyVoted, 409),
    (AlreadyDecided, 409),
    (PhaseViolation, 409),
    (Unauthorized, 403),
    (VoteRequired, 403),
    (UnknownRef, 404),
    (ValidationFailure, 422),
    (ProviderError, 502),
    (StorageFailure, 503),
]


def _http_status(exc: FlipdeckError) -> int:
    for etype, status in _STATUS:
        if isinstance(exc, etype):
            return status
    return 500


class SessionBody(BaseModel):
    kind: str
    course: str
    quiz_time_limit_s: int = 300
    prompt_phase_enabled: bool = True
    idempotency_key: Optional[str] = None


class QuestionBody(BaseModel):
    text: Optional[str] = None              # plain text in the parser grammar
    bank_entry_id: Optional[str] = None     # or push an approved bank entry
    open_prompt: Optional[str] = None       # or an open-ended jitt question


class VoteBody(BaseModel):
    labels: list[str] = Field(min_length=1)


class ResponseBody(BaseModel):
    text: str


class AdvanceBody(BaseModel):
    target: str


class SubmissionBody(BaseModel):
    prompts: list[str]
    question_text: str
    summary: Optional[str] = None
    transcript: Optional[dict] = None
    topic: Optional[str] = None


class VerdictBody(BaseModel):
    decision: str
    initial_difficulty: Optional[int] = None


class ReproduceBody(BaseModel):
    regenerated_text: str


class DifficultyBody(BaseModel):
    choice: str


class ActorBody(BaseModel):
    id: str
    role: str


class ChatBody(BaseModel):
    platform: str
    chat_id: str
    user_ref: str
    text: Optional[str] = None
    callback_data: Optional[str] = None


def session_view(session: RoutineSession) -> dict:
    return session.to_dict()


def instance_view(instance: QuestionInstance, actor: ActorRef) -> dict:
    """Students must not see the key or note while the instance is open."""
    view = {
        "id": instance.id,
        "session_id": instance.session_id,
        "role": instance.role,
        "opened_at": instance.opened_at,
        "deadline": instance.deadline,
        "closed": instance.closed,
        "question": instance.question.to_dict(),
        "voted": actor.id in instance.votes or actor.id in instance.responses,
    }
    if (
        actor.role is Role.STUDENT
        and not instance.closed
        and isinstance(instance.question, McqQuestion)
    ):
        q = view["question"]
        q.pop("answer_key", None)
        q.pop("note", None)
    return view


def entry_view(entry: BankEntry) -> dict:
    return entry.to_dict()


def build_api(
    app_core: App,
    provider: Optional[ProviderPort] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    api = FastAPI(title="flipdeck", version="0.1.0")
    hub = LiveHub(app_core)
    chat = ChatAdapter(app_core)
    provider = provider or DigestProvider()

    @api.exception_handler(FlipdeckError)
    def _flipdeck_error(request: Request, exc: FlipdeckError) -> JSONResponse:
        return JSONResponse(
            status_code=_http_status(exc), content={"code": exc.code, "message": str(exc)}
        )

    def auth(authorization: Optional[str] = Header(default=None)) -> ActorRef:
        if not authorization or not authorization.startswith("Bearer "):
            raise Unauthorized("missing bearer token")
        actor = app_core.actor_by_token(authorization.removeprefix("Bearer ").strip())
        if actor is None:
            raise Unauthorized("unknown token")
        return actor

    def require(actor: ActorRef, *roles: Role) -> ActorRef:
        if actor.role not in roles:
            raise Unauthorized(f"{actor.id} is {actor.role.value}")
        return actor

    # ------------------------------------------------------------- misc

    @api.get("/healthz")
    def healthz() -> dict:
        return {"ok": True, "events": app_core.applied_seq}

    @api.get("/whoami")
    def whoami(actor: ActorRef = Depends(auth)) -> dict:
        return actor.to_dict()

    @api.get("/fixtures/cues")
    def cues() -> dict:
        return {
            str(cue_id): {"template": tpl, "arity": arity}
            for cue_id, (tpl, arity) in CUE_TEMPLATES.items()
        }

    @api.get("/fixtures/demo")
    def demo_fixture() -> dict:
        """The bundled demo rows (single-sourced content for UI composers)."""
        import json as jsonlib
        from importlib import resources

        path = resources.files("flipdeck") / "fixtures" / "boolean_logic_demo.json"
        return jsonlib.loads(path.read_text(encoding="utf-8"))

    @api.post("/actors")
    def create_actor(body: ActorBody, actor: ActorRef = Depends(auth)) -> dict:
        require(actor, Role.INSTRUCTOR)
        created, token = app_core.register_actor(body.id, body.role)
        return {"id": created.id, "role": created.role.value, "token": token}

    # --------------------------------------------------------- sessions

    @api.post("/sessions")
    def create_session(body: SessionBody, actor: ActorRef = Depends(auth)) -> dict:
        session = app_core.create_session(
            body.kind,
            body.course,
            actor.id,
            SessionConfig(
                quiz_time_limit_s=body.quiz_time_limit_s,
                prompt_phase_enabled=body.prompt_phase_enabled,
            ),
            idempotency_key=body.idempotency_key,
        )
        return session_view(session)

    @api.get("/sessions")
    def list_sessions(course: Optional[str] = None, actor: ActorRef = Depends(auth)) -> list:
        return [session_view(s) for s in app_core.sessions_for(course)]

    @api.get("/sessions/{session_id}")
    def get_session(session_id: str, actor: ActorRef = Depends(auth)) -> dict:
        return session_view(app_core.get_session(session_id))

    @api.post("/sessions/{session_id}/advance")
    def advance(session_id: str, body: AdvanceBody, actor: ActorRef = Depends(auth)) -> dict:
        session = app_core.advance_phase(session_id, actor.id, body.target)
        return session_view(session)

    def _question_from_body(body: QuestionBody, kind: QuestionKind):
        if body.bank_entry_id:
            return None
        if body.open_prompt:
            return OpenEndedPrompt.create(body.open_prompt)
        if not body.text:
            raise ValidationFailure("provide text, open_prompt, or bank_entry_id")
        report = parse_mcq(body.text, kind)
        if not report.ok:
            raise ValidationFailure(f"question text does not parse: {report.failure.value}")
        return report.question

    @api.post("/sessions/{session_id}/polls")
    def open_poll(session_id: str, body: QuestionBody, actor: ActorRef = Depends(auth)) -> dict:
        question = _question_from_body(body, QuestionKind.POLL)
        if question is None:
            raise ValidationFailure("polls are pushed as text, not bank entries")
        instance = app_core.open_poll(session_id, actor.id, question)
        return instance_view(instance, actor)

    @api.post("/sessions/{session_id}/quizzes")
    def open_quiz(session_id: str, body: QuestionBody, actor: ActorRef = Depends(auth)) -> dict:
        session = app_core.get_session(session_id)
        kind = (
            QuestionKind.JITT_QUIZ
            if session.kind.value == "quiz_prompt_discuss"
            else QuestionKind.CLICKER_QUIZ
        )
        question = _question_from_body(body, kind)
        instance = app_core.open_quiz(
            session_id, actor.id, question=question, bank_entry_id=body.bank_entry_id
        )
        return instance_view(instance, actor)

    @api.post("/sessions/{session_id}/submissions")
    def submit(session_id: str, body: SubmissionBody, actor: ActorRef = Depends(auth)) -> dict:
        submission = app_core.submit_student_question(
            session_id,
            actor.id,
            prompts=body.prompts,
            question_text=body.question_text,
            transcript=body.transcript,
            summary=body.summary,
            topic=body.topic,
        )
        return submission.to_dict()

    @api.post("/sessions/{session_id}/consolidate")
    def consolidate(session_id: str, actor: ActorRef = Depends(auth)) -> dict:
        points = app_core.consolidate(session_id, actor.id, provider)
        return {"talking_points": points}

    @api.post("/sessions/{session_id}/difficulty")
    def choose_difficulty(
        session_id: str, body: DifficultyBody, actor: ActorRef = Depends(auth)
    ) -> dict:
        app_core.choose_difficulty(session_id, actor.id, body.choice)
        return {"ok": True, "choice": body.choice}

    @api.get("/sessions/{session_id}/jitt-entries")
    def jitt_entries(session_id: str, actor: ActorRef = Depends(auth)) -> list:
        return [entry_view(e) for e in app_core.eligible_jitt_entries(session_id, actor.id)]

    # -------------------------------------------------------- instances

    @api.get("/instances/{instance_id}")
    def get_instance(instance_id: str, actor: ActorRef = Depends(auth)) -> dict:
        return instance_view(app_core.get_instance(instance_id), actor)

    @api.post("/instances/{instance_id}/votes")
    def vote(instance_id: str, body: VoteBody, actor: ActorRef = Depends(auth)) -> dict:
        tally = app_core.cast_vote(instance_id, actor.id, body.labels)
        return {"ok": True, "tally": tally.to_dict()}

    @api.post("/instances/{instance_id}/responses")
    def respond(instance_id: str, body: ResponseBody, actor: ActorRef = Depends(auth)) -> dict:
        app_core.record_open_response(instance_id, actor.id, body.text)
        return {"ok": True}

    @api.post("/instances/{instance_id}/close")
    def close(instance_id: str, actor: ActorRef = Depends(auth)) -> dict:
        tally = app_core.close_instance(instance_id, actor.id)
        hub.publish(app_core.get_instance(instance_id), app_core.applied_seq)
        return tally.to_dict()

    @api.get("/instances/{instance_id}/tally")
    def tally(instance_id: str, actor: ActorRef = Depends(auth)) -> dict:
        return app_core.view_tally(instance_id, actor.id).to_dict()

    # ---------------------------------------------------------- vetting

    @api.get("/vetting/queue")
    def vetting_queue(actor: ActorRef = Depends(auth)) -> list:
        require(actor, Role.INSTRUCTOR, Role.ASSISTANT)
        return [entry_view(e) for e in app_core.vetting_queue()]

    @api.post("/vetting/{entry_id}/verdict")
    def verdict(entry_id: str, body: VerdictBody, actor: ActorRef = Depends(auth)) -> dict:
        entry = app_core.record_verdict(
            entry_id, actor.id, body.decision, body.initial_difficulty
        )
        return entry_view(entry)

    @api.post("/vetting/{entry_id}/reproduce")
    def reproduce(entry_id: str, body: ReproduceBody, actor: ActorRef = Depends(auth)) -> dict:
        require(actor, Role.INSTRUCTOR, Role.ASSISTANT)
        check = app_core.reproduce_check(entry_id, body.regenerated_text)
        return {"similarity": check.similarity, "verdict": check.verdict.value}

    @api.get("/bank")
    def bank(
        actor: ActorRef = Depends(auth),
        status: Optional[str] = None,
        topic: Optional[str] = None,
        kind: Optional[str] = None,
        band_lo: Optional[float] = Query(default=None),
        band_hi: Optional[float] = Query(default=None),
    ) -> list:
        require(actor, Role.INSTRUCTOR, Role.ASSISTANT)
        band = (band_lo, band_hi) if band_lo is not None and band_hi is not None else None
        entries = app_core.query_bank(
            topic=topic,
            band=band,
            status=EntryStatus(status) if status else None,
            kind=kind,
        )
        return [entry_view(e) for e in entries]

    # ----------------------------------------------------------- pacing

    @api.post("/pacing/{course}/init")
    def pacing_init(course: str, actor: ActorRef = Depends(auth)) -> dict:
        state = app_core.init_pacing(course, actor.id)
        return state.to_dict()

    @api.post("/pacing/{course}/topic")
    def pacing_topic(course: str, actor: ActorRef = Depends(auth)) -> dict:
        return app_core.start_new_topic(course, actor.id).to_dict()

    @api.get("/pacing/{course}")
    def pacing_state(course: str, actor: ActorRef = Depends(auth)) -> dict:
        state = app_core.state.pacing.get(course)
        if state is None:
            raise UnknownRef(f"no pacing state for course {course}")
        return state.to_dict()

    @api.get("/pacing/{course}/recommendation")
    def recommendation(course: str, actor: ActorRef = Depends(auth)) -> dict:
        return app_core.recommendation(course).to_dict()

    # -------------------------------------------------------- analytics

    def _analytics_payload(course: str, what: str) -> tuple[Any, str]:
        if what == "time-to-answer":
            hist = an.time_to_answer(app_core.answer_latency_pairs(course))
            return hist.to_dict(), an.histogram_csv(hist)
        if what == "difficulty":
            values = app_core.approved_difficulties(course)
            stats = an.difficulty_stats(values)
            return stats.to_dict(), an.difficulty_csv(stats)
        if what == "leaderboard":
            rows = an.leaderboard(app_core.leaderboard_scores(course))
            return [list(r) for r in rows], an.leaderboard_csv(rows)
        if what == "comprehension":
            points = app_core.comprehension_observations(course)
            return [p.to_dict() for p in points], an.comprehension_csv(points)
        raise UnknownRef(f"no analytics export {what!r}")

    @api.get("/analytics/{course}/{what}")
    def analytics(
        course: str, what: str, format: str = "json", actor: ActorRef = Depends(auth)
    ):
        payload, csv_text = _analytics_payload(course, what)
        if format == "csv":
            return PlainTextResponse(csv_text, media_type="text/csv")
        return JSONResponse(payload)

    # ------------------------------------------------------------- live

    @api.get("/live/{session_id}")
    def live(
        session_id: str,
        token: Optional[str] = None,
        authorization: Optional[str] = Header(default=None),
    ) -> StreamingResponse:
        # EventSource clients cannot set headers; accept ?token= as well.
        if token:
            actor = app_core.actor_by_token(token)
            if actor is None:
                raise Unauthorized("unknown token")
        else:
            actor = auth(authorization)
        app_core.get_session(session_id)  # 404 on unknown session

        def visible(instance_id: str) -> bool:
            """Stream deltas obey the same gate as GET tally: students see an
            instance's tally only once they voted on it or it closed."""
            if actor.role is not Role.STUDENT:
                return True
            instance = app_core.get_instance(instance_id)
            return instance.closed or actor.id in instance.votes

        def stream():
            q = hub.subscribe(session_id)
            try:
                for snapshot in hub.initial_snapshots(session_id):
                    if visible(snapshot["instance"]):
                        yield f"event: tally\ndata: {json.dumps(snapshot)}\n\n"
                while True:
                    try:
                        message = q.get(timeout=2.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if visible(message["instance"]):
                        yield f"event: tally\ndata: {json.dumps(message)}\n\n"
            finally:
                hub.unsubscribe(session_id, q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # ------------------------------------------------------------- chat

    @api.post("/chat/inbound")
    def chat_inbound(body: ChatBody) -> list:
        outbound = chat.handle(
            ChatInbound(
                platform=body.platform,
                chat_id=body.chat_id,
                user_ref=body.user_ref,
                text=body.text,
                callback_data=body.callback_data,
            )
        )
        return [o.to_dict() for o in outbound]

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        api.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return api
