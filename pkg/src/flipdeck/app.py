"""Event-sourced application core.

Every state change flows through one cycle: a command validates against the
current state, appends one or more events to the log, and the state advances
only inside ``_apply`` — the same pure transition function replay uses. That
makes a rebuilt state byte-identical to the live one by construction, which
the test suite checks literally (canonical JSON bytes).

Commands are serialized by a re-entrant lock; reads take the same lock
briefly and work on plain values.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Mapping, Optional, Union

from . import bank as bankmod
from . import pacing as pacingmod
from .analytics import ComprehensionPoint
from .domain import (
    ActorRef,
    AnyQuestion,
    McqQuestion,
    OpenEndedPrompt,
    QuestionKind,
    Role,
    RootQuestion,
)
from .errors import (
    BadParams,
    EmptyInput,
    InvalidSubmission,
    PhaseViolation,
    Unauthorized,
    UnknownRef,
)
from .events import (
    DEFAULT_SNAPSHOT_EVERY,
    EventEnvelope,
    EventLog,
    Log,
    MemoryLog,
    canonical_json,
    read_snapshot,
    write_snapshot,
)
from .fip import ProviderPort, consolidate_responses
from .mcq import parse_mcq
from .routine import (
    DIFFICULTY_BANDS,
    DifficultyChoice,
    Phase,
    QuestionInstance,
    RoutineSession,
    SessionConfig,
    SessionKind,
    StudentSubmission,
)


class LogicalClock:
    """Injected time source: starts at zero, advances only when told to."""

    def __init__(self, start: float = 0) -> None:
        self._now = start

    def now(self) -> float:
        return self._now

    def tick(self, seconds: float = 1) -> float:
        self._now += seconds
        return self._now


class WallClock:
    def now(self) -> float:
        import time

        return time.time()


class AppState:
    """All mutable service state; mutated only by App._apply."""

    def __init__(self) -> None:
        self.actors: dict[str, ActorRef] = {}
        self.tokens: dict[str, str] = {}  # token -> actor id
        self.sessions: dict[str, RoutineSession] = {}
        self.instances: dict[str, QuestionInstance] = {}
        self.submissions: dict[str, StudentSubmission] = {}
        self.bank: dict[str, bankmod.BankEntry] = {}
        self.pacing: dict[str, pacingmod.PacingState] = {}
        self.observations: dict[str, list[tuple[str, float, float]]] = {}
        self.idempotency: dict[str, str] = {}
        self.drafts: dict[str, list[str]] = {}

    def to_dict(self) -> dict:
        return {
            "actors": {k: v.to_dict() for k, v in sorted(self.actors.items())},
            "tokens": dict(sorted(self.tokens.items())),
            "sessions": {k: v.to_dict() for k, v in sorted(self.sessions.items())},
            "instances": {k: v.to_dict() for k, v in sorted(self.instances.items())},
            "submissions": {k: v.to_dict() for k, v in sorted(self.submissions.items())},
            "bank": {k: v.to_dict() for k, v in sorted(self.bank.items())},
            "pacing": {k: v.to_dict() for k, v in sorted(self.pacing.items())},
            "observations": {
                k: [[s, a, e] for s, a, e in v] for k, v in sorted(self.observations.items())
            },
            "idempotency": dict(sorted(self.idempotency.items())),
            "drafts": {k: list(v) for k, v in sorted(self.drafts.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AppState":
        state = cls()
        state.actors = {k: ActorRef.from_dict(v) for k, v in d["actors"].items()}
        state.tokens = dict(d["tokens"])
        state.sessions = {k: RoutineSession.from_dict(v) for k, v in d["sessions"].items()}
        state.instances = {k: QuestionInstance.from_dict(v) for k, v in d["instances"].items()}
        state.submissions = {
            k: StudentSubmission.from_dict(v) for k, v in d["submissions"].items()
        }
        state.bank = {k: bankmod.BankEntry.from_dict(v) for k, v in d["bank"].items()}
        state.pacing = {k: pacingmod.PacingState.from_dict(v) for k, v in d["pacing"].items()}
        state.observations = {
            k: [(s, a, e) for s, a, e in v] for k, v in d["observations"].items()
        }
        state.idempotency = dict(d["idempotency"])
        state.drafts = {k: list(v) for k, v in d["drafts"].items()}
        return state

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_dict()).encode("utf-8")


def _parse_submission_text(text: str) -> Optional[AnyQuestion]:
    """Best-effort structure for a submitted question; open-ended is fine too."""
    for kind in (QuestionKind.CLICKER_QUIZ, QuestionKind.POLL):
        report = parse_mcq(text, kind)
        if report.ok:
            return report.question
    return None


class App:
    def __init__(
        self,
        log: Optional[Log] = None,
        clock: Optional[Union[LogicalClock, WallClock]] = None,
        snapshot_every: int = DEFAULT_SNAPSHOT_EVERY,
    ) -> None:
        self.log: Log = log if log is not None else MemoryLog()
        self.clock = clock if clock is not None else LogicalClock()
        self.state = AppState()
        self.snapshot_every = snapshot_every
        self.applied_seq = 0
        self._lock = threading.RLock()
        self._vote_listeners: list[Callable[[QuestionInstance, int], None]] = []
        self._load_existing()

    # ------------------------------------------------------------------ setup

    def _load_existing(self) -> None:
        from_seq = 1
        if isinstance(self.log, EventLog):
            snap = read_snapshot(self.log.path)
            if snap is not None and snap[0] <= self.log.last_seq:
                seq, state_dict = snap
                self.state = AppState.from_dict(state_dict)
                self.applied_seq = seq
                from_seq = seq + 1
        for env in self.log.replay(from_seq):
            self._apply(env)

    @classmethod
    def rebuild(cls, log: Log, use_snapshot: bool = True,
                clock: Optional[Union[LogicalClock, WallClock]] = None) -> "App":
        """Fold the whole log (optionally snapshot-accelerated) into an App."""
        if not use_snapshot and isinstance(log, EventLog):
            app = cls.__new__(cls)
            app.log = log
            app.clock = clock or LogicalClock()
            app.state = AppState()
            app.snapshot_every = 0
            app.applied_seq = 0
            app._lock = threading.RLock()
            app._vote_listeners = []
            for env in log.replay(1):
                app._apply(env)
            return app
        return cls(log=log, clock=clock)

    def on_vote(self, listener: Callable[[QuestionInstance, int], None]) -> None:
        """Subscribe to accepted votes (live tally push); not part of state."""
        self._vote_listeners.append(listener)

    # ------------------------------------------------------------- primitives

    def _emit(self, kind: str, payload: dict):
        env = self.log.append(kind, payload, ts=self.clock.now())
        result = self._apply(env)
        if (
            self.snapshot_every
            and isinstance(self.log, EventLog)
            and env.seq % self.snapshot_every == 0
        ):
            write_snapshot(self.log.path, env.seq, self.state.to_dict())
        return result

    def _actor(self, actor_id: str) -> ActorRef:
        actor = self.state.actors.get(actor_id)
        if actor is None:
            raise UnknownRef(f"no actor {actor_id}")
        return actor

    def _session(self, session_id: str) -> RoutineSession:
        session = self.state.sessions.get(session_id)
        if session is None:
            raise UnknownRef(f"no session {session_id}")
        return session

    def _instance(self, instance_id: str) -> QuestionInstance:
        instance = self.state.instances.get(instance_id)
        if instance is None:
            raise UnknownRef(f"no instance {instance_id}")
        return instance

    def _entry(self, entry_id: str) -> bankmod.BankEntry:
        entry = self.state.bank.get(entry_id)
        if entry is None:
            raise UnknownRef(f"no bank entry {entry_id}")
        return entry

    def _require_role(self, actor_id: str, *roles: Role) -> ActorRef:
        actor = self._actor(actor_id)
        if actor.role not in roles:
            allowed = "/".join(r.value for r in roles)
            raise Unauthorized(f"{actor_id} is {actor.role.value}; needs {allowed}")
        return actor

    # ----------------------------------------------------------- transitions

    def _apply(self, env: EventEnvelope):
        """The one place state changes. Pure in (state, envelope)."""
        state, p = self.state, env.payload
        handler = getattr(self, "_apply_" + env.kind.replace(".", "_"))
        result = handler(state, env, p)
        self.applied_seq = env.seq
        return result

    def _apply_actor_registered(self, state, env, p):
        actor = ActorRef(id=p["actor_id"], role=Role(p["role"]))
        state.actors[actor.id] = actor
        state.tokens[p["token"]] = actor.id
        return actor

    def _apply_session_created(self, state, env, p):
        session = RoutineSession(
            id=f"s{env.seq}",
            kind=SessionKind(p["kind"]),
            course=p["course"],
            config=SessionConfig.from_dict(p["config"]),
            created_at=env.ts,
        )
        state.sessions[session.id] = session
        if p.get("idempotency_key"):
            state.idempotency[p["idempotency_key"]] = session.id
        return session

    def _apply_instance_opened(self, state, env, p):
        from .domain import question_from_dict

        session = state.sessions[p["session_id"]]
        instance = QuestionInstance(
            id=f"i{env.seq}",
            session_id=session.id,
            role=p["role"],
            question=question_from_dict(p["question"]),
            opened_at=env.ts,
            deadline=p.get("deadline"),
            bank_entry_id=p.get("bank_entry_id"),
        )
        state.instances[instance.id] = instance
        session.instance_ids.append(instance.id)
        session.set_phase(session.phase_after_open(p["role"]))
        if p["role"] == "jitt":
            session.jitt_opened_at = env.ts
        return instance

    def _apply_vote_cast(self, state, env, p):
        instance = state.instances[p["instance_id"]]
        instance.apply_vote(p["actor_id"], list(p["labels"]), p["at"])
        for listener in self._vote_listeners:
            listener(instance, env.seq)
        return instance.tally()

    def _apply_response_recorded(self, state, env, p):
        instance = state.instances[p["instance_id"]]
        instance.apply_response(p["actor_id"], p["text"], p["at"])
        return instance

    def _apply_instance_closed(self, state, env, p):
        instance = state.instances[p["instance_id"]]
        instance.closed = True
        session = state.sessions[instance.session_id]
        if instance.role == "poll" and session.phase is Phase.POLL_OPEN:
            session.set_phase(Phase.POLL_CLOSED)
        elif instance.role == "quiz" and session.phase is Phase.QUIZ_OPEN:
            session.set_phase(Phase.QUIZ_CLOSED)
        return instance.tally()

    def _apply_phase_advanced(self, state, env, p):
        session = state.sessions[p["session_id"]]
        session.set_phase(Phase(p["target"]))
        return session

    def _apply_difficulty_chosen(self, state, env, p):
        session = state.sessions[p["session_id"]]
        session.difficulty_prefs[p["actor_id"]] = p["choice"]
        return session

    def _apply_submission_queued(self, state, env, p):
        from .domain import question_from_dict

        submission = StudentSubmission(
            id=f"sub{env.seq}",
            author=p["author"],
            session_ref=p["session_id"],
            question_text=p["question_text"],
            prompts=list(p["prompts"]),
            parsed_question=question_from_dict(p["parsed_question"])
            if p.get("parsed_question")
            else None,
            transcript=p.get("transcript"),
            summary=p.get("summary"),
            submitted_at=env.ts,
            latency_s=p.get("latency_s"),
        )
        state.submissions[submission.id] = submission
        if p["session_id"] is not None:
            session = state.sessions[p["session_id"]]
            session.submission_ids.append(submission.id)
        question: AnyQuestion
        if submission.parsed_question is not None:
            question = submission.parsed_question
        else:
            question = OpenEndedPrompt.create(p["question_text"])
        entry = bankmod.BankEntry(
            id=f"b{env.seq}",
            question=question,
            provenance=bankmod.Provenance(
                author=p["author"],
                submission_ref=submission.id,
                provider=p.get("provider"),
                prompts=list(p["prompts"]),
            ),
            topic=p.get("topic"),
            queued_at=env.ts,
        )
        state.bank[entry.id] = entry
        return submission

    def _apply_verdict_recorded(self, state, env, p):
        entry = state.bank[p["entry_id"]]
        reviewer = state.actors[p["reviewer"]]
        return bankmod.apply_verdict(
            entry,
            reviewer,
            bankmod.Decision(p["decision"]),
            p.get("initial_difficulty"),
            at=env.ts,
        )

    def _apply_difficulty_updated(self, state, env, p):
        entry = state.bank[p["entry_id"]]
        bankmod.update_difficulty(entry, p["session_ref"], p["accuracy"])
        return entry

    def _apply_pacing_initialized(self, state, env, p):
        params = pacingmod.PacingParams.from_dict(p["params"])
        state.pacing[p["course"]] = pacingmod.init_pacing(params)
        return state.pacing[p["course"]]

    def _apply_pacing_observed(self, state, env, p):
        course = p["course"]
        current = state.pacing.get(course)
        if current is None:
            current = pacingmod.init_pacing()
        new = pacingmod.observe_quiz_outcome(current, p["accuracy"])
        state.pacing[course] = new
        state.observations.setdefault(course, []).append(
            (p["session_ref"], p["accuracy"], new.comprehension)
        )
        return new

    def _apply_pacing_topic_started(self, state, env, p):
        course = p["course"]
        current = state.pacing.get(course)
        if current is None:
            current = pacingmod.init_pacing()
        state.pacing[course] = pacingmod.start_new_topic(current)
        return state.pacing[course]

    def _apply_consolidation_recorded(self, state, env, p):
        session = state.sessions[p["session_id"]]
        session.talking_points = list(p["talking_points"])
        session.set_phase(Phase.CONSOLIDATED)
        return session

    def _apply_chat_draft_appended(self, state, env, p):
        state.drafts.setdefault(p["actor_id"], []).append(p["text"])
        return list(state.drafts[p["actor_id"]])

    def _apply_chat_draft_cleared(self, state, env, p):
        state.drafts.pop(p["actor_id"], None)
        return None

    # --------------------------------------------------------------- commands

    def register_actor(self, actor_id: str, role: Union[Role, str],
                       token: Optional[str] = None) -> tuple[ActorRef, str]:
        with self._lock:
            role = Role(role)
            existing = self.state.actors.get(actor_id)
            if existing is not None:
                if existing.role is not role:
                    raise BadParams(f"{actor_id} already registered as {existing.role.value}")
                token = next(t for t, a in self.state.tokens.items() if a == actor_id)
                return existing, token
            token = token or f"tok-{actor_id}"
            actor = self._emit(
                "actor.registered", {"actor_id": actor_id, "role": role.value, "token": token}
            )
            return actor, token

    def create_session(
        self,
        kind: Union[SessionKind, str],
        course: str,
        actor_id: str,
        config: Optional[SessionConfig] = None,
        idempotency_key: Optional[str] = None,
    ) -> RoutineSession:
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            kind = SessionKind(kind)
            if idempotency_key and idempotency_key in self.state.idempotency:
                return self._session(self.state.idempotency[idempotency_key])
            config = config or SessionConfig()
            return self._emit(
                "session.created",
                {
                    "kind": kind.value,
                    "course": course,
                    "config": config.to_dict(),
                    "idempotency_key": idempotency_key,
                },
            )

    def open_poll(self, session_id: str, actor_id: str, question: McqQuestion) -> QuestionInstance:
        return self._open_instance(session_id, actor_id, "poll", question)

    def open_quiz(
        self,
        session_id: str,
        actor_id: str,
        question: Optional[AnyQuestion] = None,
        bank_entry_id: Optional[str] = None,
    ) -> QuestionInstance:
        with self._lock:
            session = self._session(session_id)
            role = "jitt" if session.kind is SessionKind.QUIZ_PROMPT_DISCUSS else "quiz"
            return self._open_instance(session_id, actor_id, role, question, bank_entry_id)

    def _open_instance(
        self,
        session_id: str,
        actor_id: str,
        role: str,
        question: Optional[AnyQuestion],
        bank_entry_id: Optional[str] = None,
    ) -> QuestionInstance:
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            session = self._session(session_id)
            if bank_entry_id is not None:
                entry = self._entry(bank_entry_id)
                if not entry.selectable:
                    raise BadParams(f"entry {bank_entry_id} is {entry.status.value}, not approved")
                if isinstance(entry.question, RootQuestion):
                    raise BadParams(
                        "root questions are studied interactively, not pushed as live instances"
                    )
                question = entry.question
            if question is None:
                raise BadParams("need a question or an approved bank entry")
            session.check_open(role)
            deadline = None
            if role == "quiz":
                deadline = self.clock.now() + session.config.quiz_time_limit_s
            return self._emit(
                "instance.opened",
                {
                    "session_id": session_id,
                    "role": role,
                    "question": question.to_dict(),
                    "deadline": deadline,
                    "bank_entry_id": bank_entry_id,
                },
            )

    def cast_vote(self, instance_id: str, actor_id: str, labels: Iterable[str]):
        with self._lock:
            actor = self._actor(actor_id)
            instance = self._instance(instance_id)
            at = self.clock.now()
            chosen = instance.check_vote(actor, labels, at)
            return self._emit(
                "vote.cast",
                {"instance_id": instance_id, "actor_id": actor_id, "labels": chosen, "at": at},
            )

    def record_open_response(self, instance_id: str, actor_id: str, text: str):
        with self._lock:
            actor = self._actor(actor_id)
            instance = self._instance(instance_id)
            cleaned = instance.check_response(actor, text)
            return self._emit(
                "response.recorded",
                {
                    "instance_id": instance_id,
                    "actor_id": actor_id,
                    "text": cleaned,
                    "at": self.clock.now(),
                },
            )

    def view_tally(self, instance_id: str, actor_id: str):
        with self._lock:
            actor = self._actor(actor_id)
            return self._instance(instance_id).tally_for(actor)

    def close_instance(self, instance_id: str, actor_id: str):
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            instance = self._instance(instance_id)
            if instance.closed:
                raise PhaseViolation(f"instance {instance_id} already closed")
            accuracy = instance.accuracy()
            session = self.state.sessions[instance.session_id]
            tally = self._emit("instance.closed", {"instance_id": instance_id})
            if accuracy is not None and instance.role in ("quiz", "jitt"):
                self._emit(
                    "pacing.observed",
                    {
                        "course": session.course,
                        "session_ref": session.id,
                        "instance_id": instance_id,
                        "accuracy": accuracy,
                    },
                )
                if instance.bank_entry_id:
                    self._emit(
                        "difficulty.updated",
                        {
                            "entry_id": instance.bank_entry_id,
                            "session_ref": session.id,
                            "accuracy": accuracy,
                        },
                    )
            return tally

    def advance_phase(self, session_id: str, actor_id: str, target: Union[Phase, str]):
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            target = Phase(target)
            session = self._session(session_id)
            session.check_advance(target)
            return self._emit(
                "phase.advanced", {"session_id": session_id, "target": target.value}
            )

    def choose_difficulty(self, session_id: str, actor_id: str,
                          choice: Union[DifficultyChoice, str]):
        with self._lock:
            self._require_role(actor_id, Role.STUDENT)
            choice = DifficultyChoice(choice)
            session = self._session(session_id)
            session.check_difficulty_choice()
            return self._emit(
                "difficulty.chosen",
                {"session_id": session_id, "actor_id": actor_id, "choice": choice.value},
            )

    def submit_student_question(
        self,
        session_id: str,
        author_id: str,
        prompts: Iterable[str],
        question_text: str,
        transcript: Optional[dict] = None,
        summary: Optional[str] = None,
        topic: Optional[str] = None,
        provider: Optional[str] = None,
    ) -> StudentSubmission:
        with self._lock:
            self._require_role(author_id, Role.STUDENT)
            session = self._session(session_id)
            session.check_submission_phase()
            prompts = [p.strip() for p in prompts if p.strip()]
            StudentSubmission.check(prompts, question_text)
            parsed = _parse_submission_text(question_text)
            latency = None
            if session.jitt_opened_at is not None:
                latency = self.clock.now() - session.jitt_opened_at
            return self._emit(
                "submission.queued",
                {
                    "session_id": session_id,
                    "author": author_id,
                    "question_text": question_text,
                    "prompts": prompts,
                    "parsed_question": parsed.to_dict() if parsed else None,
                    "transcript": transcript,
                    "summary": summary,
                    "topic": topic,
                    "provider": provider,
                    "latency_s": latency,
                },
            )

    def enqueue_seed_entry(
        self,
        author_id: str,
        prompts: Iterable[str],
        question_text: str,
        kind: Union[QuestionKind, str],
        topic: Optional[str] = None,
        provider: Optional[str] = None,
    ) -> StudentSubmission:
        """Queue a pre-authored fixture question for vetting, outside any
        live session (used by the CLI ``seed`` command)."""
        with self._lock:
            self._actor(author_id)
            kind = QuestionKind(kind)
            prompts = [p.strip() for p in prompts if p.strip()]
            StudentSubmission.check(prompts, question_text)
            parsed = None
            if kind is not QuestionKind.JITT_QUIZ:
                report = parse_mcq(question_text, kind)
                if not report.ok:
                    raise InvalidSubmission(
                        f"fixture text does not parse as {kind.value}: {report.failure}"
                    )
                parsed = report.question
            else:
                report = parse_mcq(question_text, kind)
                if report.ok:
                    parsed = report.question
            return self._emit(
                "submission.queued",
                {
                    "session_id": None,
                    "author": author_id,
                    "question_text": question_text,
                    "prompts": prompts,
                    "parsed_question": parsed.to_dict() if parsed else None,
                    "transcript": None,
                    "summary": None,
                    "topic": topic,
                    "provider": provider,
                    "latency_s": None,
                },
            )

    def record_verdict(
        self,
        entry_id: str,
        reviewer_id: str,
        decision: Union[bankmod.Decision, str],
        initial_difficulty: Optional[int] = None,
    ) -> bankmod.BankEntry:
        with self._lock:
            reviewer = self._actor(reviewer_id)
            decision = bankmod.Decision(decision)
            entry = self._entry(entry_id)
            bankmod.check_verdict(entry, reviewer, decision, initial_difficulty)
            return self._emit(
                "verdict.recorded",
                {
                    "entry_id": entry_id,
                    "reviewer": reviewer_id,
                    "decision": decision.value,
                    "initial_difficulty": initial_difficulty,
                },
            )

    def init_pacing(self, course: str, actor_id: str,
                    params: Optional[pacingmod.PacingParams] = None) -> pacingmod.PacingState:
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            params = params or pacingmod.PacingParams()
            params.validate()
            return self._emit(
                "pacing.initialized", {"course": course, "params": params.to_dict()}
            )

    def start_new_topic(self, course: str, actor_id: str) -> pacingmod.PacingState:
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            return self._emit("pacing.topic_started", {"course": course})

    def consolidate(self, session_id: str, actor_id: str,
                    provider: ProviderPort) -> list[str]:
        """Summarize a session's open responses and submitted questions into
        talking points, advancing the session to the consolidated phase."""
        with self._lock:
            self._require_role(actor_id, Role.INSTRUCTOR)
            session = self._session(session_id)
            if session.kind is not SessionKind.QUIZ_PROMPT_DISCUSS:
                raise PhaseViolation("consolidation belongs to the pre-class routine")
            if session.phase is not Phase.PROMPT_PHASE:
                raise PhaseViolation(f"cannot consolidate in phase {session.phase.value}")
            responses: list[str] = []
            for iid in session.instance_ids:
                instance = self.state.instances[iid]
                responses.extend(text for _, text in sorted(instance.responses.items()))
            for sid in session.submission_ids:
                responses.append(self.state.submissions[sid].question_text)
            if not responses:
                raise EmptyInput("nothing to consolidate yet")
            points = consolidate_responses(responses, provider)
            session = self._emit(
                "consolidation.recorded",
                {"session_id": session_id, "talking_points": points},
            )
            return session.talking_points

    def append_chat_draft(self, actor_id: str, text: str) -> list[str]:
        with self._lock:
            self._require_role(actor_id, Role.STUDENT)
            text = text.strip()
            if not text:
                raise InvalidSubmission("empty draft line")
            return self._emit("chat.draft_appended", {"actor_id": actor_id, "text": text})

    def file_chat_draft(self, actor_id: str, session_id: str) -> StudentSubmission:
        """Turn a chat draft (prompts... then the question) into a submission."""
        with self._lock:
            draft = self.state.drafts.get(actor_id, [])
            if len(draft) < 2:
                raise InvalidSubmission("a draft needs at least one prompt line and a question line")
            submission = self.submit_student_question(
                session_id,
                actor_id,
                prompts=draft[:-1],
                question_text=draft[-1],
            )
            self._emit("chat.draft_cleared", {"actor_id": actor_id})
            return submission

    # ---------------------------------------------------------------- queries

    def actor_by_token(self, token: str) -> Optional[ActorRef]:
        with self._lock:
            actor_id = self.state.tokens.get(token)
            return self.state.actors.get(actor_id) if actor_id else None

    def vetting_queue(self) -> list[bankmod.BankEntry]:
        with self._lock:
            return bankmod.query_bank(self.state.bank.values(), status=bankmod.EntryStatus.PENDING)

    def query_bank(self, **filters) -> list[bankmod.BankEntry]:
        with self._lock:
            return bankmod.query_bank(self.state.bank.values(), **filters)

    def recommendation(self, course: str) -> pacingmod.Recommendation:
        with self._lock:
            state = self.state.pacing.get(course)
            if state is None:
                state = pacingmod.init_pacing()
            return pacingmod.recommend_next(state, self.state.bank.values())

    def eligible_jitt_entries(self, session_id: str, actor_id: str) -> list[bankmod.BankEntry]:
        """Approved jitt entries honoring the student's difficulty preference."""
        with self._lock:
            session = self._session(session_id)
            band = None
            pref = session.difficulty_prefs.get(actor_id)
            if pref is not None:
                band = DIFFICULTY_BANDS[DifficultyChoice(pref)]
            return bankmod.query_bank(
                self.state.bank.values(),
                band=band,
                status=bankmod.EntryStatus.APPROVED,
                kind="jitt_quiz",
            )

    def comprehension_observations(self, course: str) -> list[ComprehensionPoint]:
        with self._lock:
            return [
                ComprehensionPoint(session_ref=s, accuracy=a, ewma=e)
                for s, a, e in self.state.observations.get(course, [])
            ]

    def answer_latency_pairs(self, course: str) -> list[tuple[float, float]]:
        """(assigned_at, submitted_at) for submissions in pre-class sessions."""
        with self._lock:
            pairs = []
            for submission in self.state.submissions.values():
                session = self.state.sessions.get(submission.session_ref)
                if session is None or session.course != course:
                    continue
                if session.jitt_opened_at is None or submission.latency_s is None:
                    continue
                pairs.append((session.jitt_opened_at, submission.submitted_at))
            pairs.sort()
            return pairs

    def _entry_course(self, entry: bankmod.BankEntry) -> Optional[str]:
        """Course an entry belongs to via its submission's session; None for
        seeded entries, which count for every course."""
        submission = self.state.submissions.get(entry.provenance.submission_ref or "")
        if submission is None or submission.session_ref is None:
            return None
        session = self.state.sessions.get(submission.session_ref)
        return session.course if session else None

    def approved_difficulties(self, course: Optional[str] = None) -> list[float]:
        with self._lock:
            out = []
            for _, e in sorted(self.state.bank.items()):
                if e.status is not bankmod.EntryStatus.APPROVED or e.difficulty is None:
                    continue
                entry_course = self._entry_course(e)
                if course is not None and entry_course is not None and entry_course != course:
                    continue
                out.append(e.difficulty)
            return out

    def leaderboard_scores(self, course: str) -> dict[str, int]:
        """Authored-and-approved entries weigh 3, correct quiz votes weigh 1."""
        with self._lock:
            scores: dict[str, int] = {
                a.id: 0 for a in self.state.actors.values() if a.role is Role.STUDENT
            }
            for entry in self.state.bank.values():
                if entry.status is bankmod.EntryStatus.APPROVED:
                    entry_course = self._entry_course(entry)
                    if entry_course is not None and entry_course != course:
                        continue
                    author = entry.provenance.author
                    if author in scores:
                        scores[author] += 3
            for instance in self.state.instances.values():
                session = self.state.sessions.get(instance.session_id)
                if session is None or session.course != course or instance.open_ended:
                    continue
                if instance.role not in ("quiz", "jitt"):
                    continue
                key = instance.question.answer_key
                for actor_id, labels in instance.votes.items():
                    if set(labels) == key and actor_id in scores:
                        scores[actor_id] += 1
            return scores

    def sessions_for(self, course: Optional[str] = None) -> list[RoutineSession]:
        with self._lock:
            out = [
                s
                for _, s in sorted(self.state.sessions.items())
                if course is None or s.course == course
            ]
            return out

    def get_session(self, session_id: str) -> RoutineSession:
        with self._lock:
            return self._session(session_id)

    def get_instance(self, instance_id: str) -> QuestionInstance:
        with self._lock:
            return self._instance(instance_id)

    def get_entry(self, entry_id: str) -> bankmod.BankEntry:
        with self._lock:
            return self._entry(entry_id)

    def reproduce_check(self, entry_id: str, regenerated_text: str) -> bankmod.ReproduceCheck:
        with self._lock:
            entry = self._entry(entry_id)
            if isinstance(entry.question, McqQuestion):
                submitted = self.state.submissions.get(entry.provenance.submission_ref or "")
                text = submitted.question_text if submitted else entry.question.stem
            else:
                text = entry.question.prompt
            return bankmod.reproduce_check(text, regenerated_text)

    def canonical_state(self) -> bytes:
        with self._lock:
            return self.state.canonical_bytes()
