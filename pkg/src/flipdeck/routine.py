"""Poll/quiz routine state machines: phases, deadlines, tallies, gating.

Two session kinds run here. The in-class routine goes poll -> peer prompting
-> timed quiz -> discussion; the pre-class routine opens an untimed quiz,
collects prompts and student questions, consolidates responses, then feeds
the discussion. Phases only ever move forward; votes are immutable once
cast; students see a tally only after their own vote is in (instructors see
it live); quiz votes past the deadline are rejected (the deadline instant
itself still counts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .domain import ActorRef, AnyQuestion, McqQuestion, Role, question_from_dict, question_to_dict
from .errors import (
    AlreadyVoted,
    DeadlineExpired,
    InvalidSubmission,
    InvalidVote,
    PhaseViolation,
    Unauthorized,
    UnknownLabel,
    VoteRequired,
)

DEFAULT_QUIZ_TIME_LIMIT_S = 300


class SessionKind(str, Enum):
    POLL_PROMPT_QUIZ = "poll_prompt_quiz"
    QUIZ_PROMPT_DISCUSS = "quiz_prompt_discuss"


class Phase(str, Enum):
    CREATED = "created"
    POLL_OPEN = "poll_open"
    POLL_CLOSED = "poll_closed"
    PROMPT_PHASE = "prompt_phase"
    QUIZ_OPEN = "quiz_open"
    QUIZ_CLOSED = "quiz_closed"
    DISCUSSED = "discussed"
    JITT_OPEN = "jitt_open"
    CONSOLIDATED = "consolidated"


PHASE_ORDER: dict[SessionKind, tuple[Phase, ...]] = {
    SessionKind.POLL_PROMPT_QUIZ: (
        Phase.CREATED,
        Phase.POLL_OPEN,
        Phase.POLL_CLOSED,
        Phase.PROMPT_PHASE,
        Phase.QUIZ_OPEN,
        Phase.QUIZ_CLOSED,
        Phase.DISCUSSED,
    ),
    SessionKind.QUIZ_PROMPT_DISCUSS: (
        Phase.CREATED,
        Phase.JITT_OPEN,
        Phase.PROMPT_PHASE,
        Phase.CONSOLIDATED,
        Phase.DISCUSSED,
    ),
}

# Targets advance_phase may reach administratively (open/close/consolidate
# drive the rest). The in-class prompt phase can be skipped entirely when
# disabled by config, which is the one permitted jump: poll_closed -> quiz_open
# via open_quiz.
_ADVANCE_TARGETS = {
    (SessionKind.POLL_PROMPT_QUIZ, Phase.POLL_CLOSED): Phase.PROMPT_PHASE,
    (SessionKind.POLL_PROMPT_QUIZ, Phase.QUIZ_CLOSED): Phase.DISCUSSED,
    (SessionKind.QUIZ_PROMPT_DISCUSS, Phase.JITT_OPEN): Phase.PROMPT_PHASE,
    (SessionKind.QUIZ_PROMPT_DISCUSS, Phase.CONSOLIDATED): Phase.DISCUSSED,
}


@dataclass
class SessionConfig:
    quiz_time_limit_s: int = DEFAULT_QUIZ_TIME_LIMIT_S
    prompt_phase_enabled: bool = True

    def to_dict(self) -> dict:
        return {
            "quiz_time_limit_s": self.quiz_time_limit_s,
            "prompt_phase_enabled": self.prompt_phase_enabled,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SessionConfig":
        return cls(
            quiz_time_limit_s=d.get("quiz_time_limit_s", DEFAULT_QUIZ_TIME_LIMIT_S),
            prompt_phase_enabled=d.get("prompt_phase_enabled", True),
        )


class DifficultyChoice(str, Enum):
    MODERATE = "moderate"
    ELEVATED = "elevated"


DIFFICULTY_BANDS: dict[DifficultyChoice, tuple[float, float]] = {
    DifficultyChoice.MODERATE: (1.0, 5.0),
    DifficultyChoice.ELEVATED: (6.0, 10.0),
}


@dataclass
class RoutineSession:
    id: str
    kind: SessionKind
    course: str
    config: SessionConfig
    created_at: float
    phase: Phase = Phase.CREATED
    phase_history: list[str] = field(default_factory=list)
    instance_ids: list[str] = field(default_factory=list)
    jitt_opened_at: Optional[float] = None
    difficulty_prefs: dict[str, str] = field(default_factory=dict)
    submission_ids: list[str] = field(default_factory=list)
    talking_points: list[str] = field(default_factory=list)
    grouping_note: Optional[str] = None  # social peer groups, recorded not enforced

    def __post_init__(self) -> None:
        if not self.phase_history:
            self.phase_history.append(self.phase.value)

    def order(self) -> tuple[Phase, ...]:
        return PHASE_ORDER[self.kind]

    def set_phase(self, phase: Phase) -> None:
        self.phase = phase
        self.phase_history.append(phase.value)

    def check_advance(self, target: Phase) -> None:
        expected = _ADVANCE_TARGETS.get((self.kind, self.phase))
        if expected is not target:
            raise PhaseViolation(
                f"cannot advance {self.kind.value} session from {self.phase.value} to {target.value}"
            )
        if (
            target is Phase.PROMPT_PHASE
            and self.kind is SessionKind.POLL_PROMPT_QUIZ
            and not self.config.prompt_phase_enabled
        ):
            raise PhaseViolation("prompt phase disabled for this session")

    def check_open(self, instance_role: str) -> None:
        """Validate opening a poll/quiz/jitt instance in the current phase."""
        kind, phase = self.kind, self.phase
        if instance_role == "poll":
            if kind is not SessionKind.POLL_PROMPT_QUIZ or phase is not Phase.CREATED:
                raise PhaseViolation(f"cannot open a poll in phase {phase.value}")
        elif instance_role == "quiz":
            if kind is not SessionKind.POLL_PROMPT_QUIZ or phase not in (
                Phase.POLL_CLOSED,
                Phase.PROMPT_PHASE,
            ):
                raise PhaseViolation(f"cannot open a quiz in phase {phase.value}")
        elif instance_role == "jitt":
            if kind is not SessionKind.QUIZ_PROMPT_DISCUSS or phase is not Phase.CREATED:
                raise PhaseViolation(f"cannot open a jitt quiz in phase {phase.value}")
        else:
            raise ValueError(f"unknown instance role {instance_role!r}")

    def phase_after_open(self, instance_role: str) -> Phase:
        return {"poll": Phase.POLL_OPEN, "quiz": Phase.QUIZ_OPEN, "jitt": Phase.JITT_OPEN}[
            instance_role
        ]

    def check_submission_phase(self) -> None:
        allowed = (
            (Phase.PROMPT_PHASE,)
            if self.kind is SessionKind.POLL_PROMPT_QUIZ
            else (Phase.JITT_OPEN, Phase.PROMPT_PHASE)
        )
        if self.phase not in allowed:
            raise PhaseViolation(f"submissions not accepted in phase {self.phase.value}")

    def check_difficulty_choice(self) -> None:
        if self.kind is not SessionKind.QUIZ_PROMPT_DISCUSS or self.phase is not Phase.JITT_OPEN:
            raise PhaseViolation("difficulty self-calibration only while a jitt quiz is open")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "course": self.course,
            "config": self.config.to_dict(),
            "created_at": self.created_at,
            "phase": self.phase.value,
            "phase_history": list(self.phase_history),
            "instance_ids": list(self.instance_ids),
            "jitt_opened_at": self.jitt_opened_at,
            "difficulty_prefs": dict(self.difficulty_prefs),
            "submission_ids": list(self.submission_ids),
            "talking_points": list(self.talking_points),
            "grouping_note": self.grouping_note,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RoutineSession":
        session = cls(
            id=d["id"],
            kind=SessionKind(d["kind"]),
            course=d["course"],
            config=SessionConfig.from_dict(d["config"]),
            created_at=d["created_at"],
            phase=Phase(d["phase"]),
            phase_history=list(d["phase_history"]),
            instance_ids=list(d["instance_ids"]),
            jitt_opened_at=d.get("jitt_opened_at"),
            difficulty_prefs=dict(d.get("difficulty_prefs", {})),
            submission_ids=list(d.get("submission_ids", [])),
            talking_points=list(d.get("talking_points", [])),
            grouping_note=d.get("grouping_note"),
        )
        return session


@dataclass(frozen=True)
class VoteTally:
    question_ref: str
    counts: Mapping[str, int]
    voters: frozenset[str]
    closed: bool

    def to_dict(self) -> dict:
        return {
            "question_ref": self.question_ref,
            "counts": dict(sorted(self.counts.items())),
            "voters": len(self.voters),
            "closed": self.closed,
        }


@dataclass
class QuestionInstance:
    """One pushed question: a poll, a timed quiz, or an untimed jitt quiz."""

    id: str
    session_id: str
    role: str  # poll | quiz | jitt
    question: AnyQuestion
    opened_at: float
    deadline: Optional[float] = None
    bank_entry_id: Optional[str] = None
    closed: bool = False
    counts: dict[str, int] = field(default_factory=dict)
    votes: dict[str, list[str]] = field(default_factory=dict)  # actor -> chosen labels
    vote_times: dict[str, float] = field(default_factory=dict)
    responses: dict[str, str] = field(default_factory=dict)  # open-ended answers
    response_times: dict[str, float] = field(default_factory=dict)

    @property
    def open_ended(self) -> bool:
        return not isinstance(self.question, McqQuestion)

    def check_vote(self, actor: ActorRef, labels: Iterable[str], at: float) -> list[str]:
        """Validate a vote; returns the normalized label list."""
        if self.open_ended:
            raise InvalidVote(f"instance {self.id} is open-ended; votes need options")
        if self.closed:
            raise PhaseViolation(f"instance {self.id} is closed")
        if actor.role is not Role.STUDENT:
            raise Unauthorized(f"only students vote; {actor.id} is {actor.role.value}")
        if actor.id in self.votes:
            raise AlreadyVoted(f"{actor.id} already voted on {self.id}")
        chosen = sorted({l.strip().upper() for l in labels})
        if len(chosen) != 1:
            raise InvalidVote("clicker votes carry exactly one option label")
        question_labels = self.question.labels()
        unknown = [l for l in chosen if l not in question_labels]
        if unknown:
            raise UnknownLabel(f"labels {unknown} not among options {sorted(question_labels)}")
        if self.deadline is not None and at > self.deadline:
            raise DeadlineExpired(f"vote at {at} after deadline {self.deadline}")
        return chosen

    def apply_vote(self, actor_id: str, labels: list[str], at: float) -> None:
        self.votes[actor_id] = labels
        self.vote_times[actor_id] = at
        for label in labels:
            self.counts[label] = self.counts.get(label, 0) + 1

    def check_response(self, actor: ActorRef, text: str) -> str:
        if not self.open_ended:
            raise InvalidVote(f"instance {self.id} expects option votes, not free text")
        if self.closed:
            raise PhaseViolation(f"instance {self.id} is closed")
        if actor.role is not Role.STUDENT:
            raise Unauthorized(f"only students respond; {actor.id} is {actor.role.value}")
        if actor.id in self.responses:
            raise AlreadyVoted(f"{actor.id} already responded on {self.id}")
        text = text.strip()
        if not text:
            raise InvalidSubmission("empty response")
        return text

    def apply_response(self, actor_id: str, text: str, at: float) -> None:
        self.responses[actor_id] = text
        self.response_times[actor_id] = at

    def tally(self) -> VoteTally:
        return VoteTally(
            question_ref=self.question.id,
            counts=dict(self.counts),
            voters=frozenset(self.votes),
            closed=self.closed,
        )

    def tally_for(self, actor: ActorRef) -> VoteTally:
        """Instructors see the live tally; a student only after voting or close."""
        if self.open_ended:
            raise InvalidVote(f"instance {self.id} is open-ended; no tally exists")
        if actor.role is Role.STUDENT and not self.closed and actor.id not in self.votes:
            raise VoteRequired(f"{actor.id} must vote on {self.id} before seeing the tally")
        return self.tally()

    def accuracy(self) -> Optional[float]:
        """Fraction of voters whose vote matches the key exactly; None if no
        voters or the question is not machine-gradeable."""
        if self.open_ended or not self.votes:
            return None
        key = self.question.answer_key
        correct = sum(1 for labels in self.votes.values() if set(labels) == key)
        return correct / len(self.votes)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "session_id": self.session_id,
            "role": self.role,
            "question": question_to_dict(self.question),
            "opened_at": self.opened_at,
            "deadline": self.deadline,
            "bank_entry_id": self.bank_entry_id,
            "closed": self.closed,
            "counts": dict(sorted(self.counts.items())),
            "votes": {k: list(v) for k, v in sorted(self.votes.items())},
            "vote_times": dict(sorted(self.vote_times.items())),
            "responses": dict(sorted(self.responses.items())),
            "response_times": dict(sorted(self.response_times.items())),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "QuestionInstance":
        return cls(
            id=d["id"],
            session_id=d["session_id"],
            role=d["role"],
            question=question_from_dict(d["question"]),
            opened_at=d["opened_at"],
            deadline=d.get("deadline"),
            bank_entry_id=d.get("bank_entry_id"),
            closed=d.get("closed", False),
            counts=dict(d.get("counts", {})),
            votes={k: list(v) for k, v in d.get("votes", {}).items()},
            vote_times=dict(d.get("vote_times", {})),
            responses=dict(d.get("responses", {})),
            response_times=dict(d.get("response_times", {})),
        )


@dataclass
class StudentSubmission:
    """A student's generated question plus the prompts that produced it."""

    id: str
    author: str
    session_ref: Optional[str]
    question_text: str
    prompts: list[str]
    parsed_question: Optional[AnyQuestion] = None
    transcript: Optional[dict] = None
    summary: Optional[str] = None
    submitted_at: float = 0.0
    latency_s: Optional[float] = None  # vs. the session's jitt assignment time

    @staticmethod
    def check(prompts: Iterable[str], question_text: str) -> None:
        if not [p for p in prompts if p.strip()]:
            raise InvalidSubmission("at least one prompt is required")
        if not question_text.strip():
            raise InvalidSubmission("submission carries no question")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "author": self.author,
            "session_ref": self.session_ref,
            "question_text": self.question_text,
            "prompts": list(self.prompts),
            "parsed_question": question_to_dict(self.parsed_question)
            if self.parsed_question
            else None,
            "transcript": self.transcript,
            "summary": self.summary,
            "submitted_at": self.submitted_at,
            "latency_s": self.latency_s,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StudentSubmission":
        return cls(
            id=d["id"],
            author=d["author"],
            session_ref=d["session_ref"],
            question_text=d["question_text"],
            prompts=list(d["prompts"]),
            parsed_question=question_from_dict(d["parsed_question"])
            if d.get("parsed_question")
            else None,
            transcript=d.get("transcript"),
            summary=d.get("summary"),
            submitted_at=d.get("submitted_at", 0.0),
            latency_s=d.get("latency_s"),
        )
