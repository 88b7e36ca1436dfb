"""Flipped-interaction sessions: the model asks, the student answers, until
the model produces the target question.

The orchestrator builds the seed prompt, loops a pluggable text provider,
parses every model turn, answers clarifying questions with a canned probe,
injects a diversification instruction when the model starts repeating
itself, and records the whole exchange as a transcript.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Optional, Protocol, Sequence, Union

from .bank import token_jaccard
from .domain import McqQuestion, QuestionKind
from .errors import ArityMismatch, EmptyInput, ProviderError, UnknownCue
from .mcq import parse_mcq

REPETITION_THRESHOLD = 0.9
DIVERSIFY_INSTRUCTION = "Ask about a different aspect; do not repeat earlier questions."
DEFAULT_ANSWER_PROBE = "I'm not sure; choose what you think is most instructive."
DEFAULT_MAX_TURNS = 8


class GoalFormat(str, Enum):
    CLICKER_POLL = "clicker_poll"
    CLICKER_QUIZ = "clicker_quiz"
    JITT_OPEN = "jitt_open"


_FORMAT_PHRASE = {
    GoalFormat.CLICKER_POLL: "clicker poll",
    GoalFormat.CLICKER_QUIZ: "clicker quiz",
    GoalFormat.JITT_OPEN: "open-ended question",
}

_FORMAT_KIND = {
    GoalFormat.CLICKER_POLL: QuestionKind.POLL,
    GoalFormat.CLICKER_QUIZ: QuestionKind.CLICKER_QUIZ,
}

_COUNT_WORDS = {2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven", 8: "eight"}


@dataclass(frozen=True)
class QuestionGoal:
    topic: str
    format: GoalFormat
    focus: Optional[str] = None
    option_count: Optional[int] = None
    constraints: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.format is not GoalFormat.JITT_OPEN:
            if self.option_count is None:
                raise ValueError("option_count required for poll/quiz goals")
            if not 2 <= self.option_count <= 8:
                raise ValueError(f"option_count must be 2..8, got {self.option_count}")


def build_flipped_prompt(goal: QuestionGoal) -> str:
    """Deterministic seed prompt asking the model to take the asking role."""
    focus = goal.focus or goal.topic
    lines = []
    if goal.format is GoalFormat.JITT_OPEN:
        lines.append(
            f"Please ask me questions to help me understand {goal.topic}. "
            f"Once you have enough information, create an open-ended question about {focus}."
        )
    else:
        count = _COUNT_WORDS[goal.option_count]
        lines.append(
            f"Please ask me questions to help me understand {goal.topic}. "
            f"Once you have enough information, create a {_FORMAT_PHRASE[goal.format]} "
            f"with {count} choices about {focus}."
        )
    for constraint in goal.constraints:
        lines.append(f"Requirement: {constraint}")
    return "\n".join(lines)


class Speaker(str, Enum):
    MODEL = "model"
    USER = "user"


@dataclass(frozen=True)
class Turn:
    speaker: Speaker
    text: str
    at: int  # logical timestamp within the session

    def to_dict(self) -> dict:
        return {"speaker": self.speaker.value, "text": self.text, "at": self.at}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Turn":
        return cls(speaker=Speaker(d["speaker"]), text=d["text"], at=d["at"])


class SessionStatus(str, Enum):
    COMPLETED = "completed"
    MAX_TURNS_EXCEEDED = "max_turns_exceeded"
    PROVIDER_ERROR = "provider_error"


@dataclass
class FipTranscript:
    goal: QuestionGoal
    provider_identity: str
    turns: list[Turn] = field(default_factory=list)
    status: Optional[SessionStatus] = None
    result: Optional[Union[McqQuestion, str]] = None
    error: Optional[str] = None

    def model_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker is Speaker.MODEL]

    def to_dict(self) -> dict:
        result: Optional[dict | str]
        if isinstance(self.result, McqQuestion):
            result = self.result.to_dict()
        else:
            result = self.result
        return {
            "goal": {
                "topic": self.goal.topic,
                "focus": self.goal.focus,
                "format": self.goal.format.value,
                "option_count": self.goal.option_count,
                "constraints": list(self.goal.constraints),
            },
            "provider": self.provider_identity,
            "turns": [t.to_dict() for t in self.turns],
            "status": self.status.value if self.status else None,
            "result": result,
            "error": self.error,
        }

    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class ProviderPort(Protocol):
    """Capability needed from a text generator: stateless, full history in."""

    identity: str

    def generate(self, prompt_text: str, history: Sequence[Turn]) -> str: ...


class ScriptedProvider:
    """Replays a fixed list of model replies; raises when the script is spent
    (or immediately, when constructed with fail_at)."""

    def __init__(self, replies: Sequence[str], identity: str = "scripted:fixture",
                 fail_at: Optional[int] = None) -> None:
        self._replies = list(replies)
        self._cursor = 0
        self.identity = identity
        self._fail_at = fail_at

    def generate(self, prompt_text: str, history: Sequence[Turn]) -> str:
        call_index = self._cursor
        if self._fail_at is not None and call_index >= self._fail_at:
            raise ProviderError(f"scripted failure at call {call_index}")
        if self._cursor >= len(self._replies):
            raise ProviderError("script exhausted")
        reply = self._replies[self._cursor]
        self._cursor += 1
        return reply


class RecordedProvider:
    """Replays the model turns of a previously recorded transcript."""

    def __init__(self, transcript: Mapping) -> None:
        self._replies = [
            t["text"] for t in transcript.get("turns", []) if t.get("speaker") == "model"
        ]
        self._cursor = 0
        self.identity = f"recorded:{transcript.get('provider', 'unknown')}"

    def generate(self, prompt_text: str, history: Sequence[Turn]) -> str:
        if self._cursor >= len(self._replies):
            raise ProviderError("recording exhausted")
        reply = self._replies[self._cursor]
        self._cursor += 1
        return reply


class DigestProvider:
    """Deterministic no-model summarizer: echoes the distinct bulleted inputs
    of a consolidation prompt back as talking points. Stands in for a live
    provider in demos and simulations."""

    identity = "digest:v1"

    def generate(self, prompt_text: str, history: Sequence[Turn]) -> str:
        points = []
        for line in prompt_text.split("\n"):
            line = line.strip()
            if line.startswith("- "):
                points.append(line[2:].strip())
        if not points:
            return "No responses to discuss."
        return "\n".join(f"Discuss: {p}" for p in points[:10])


class HttpProvider:
    """Adapter for a live generation endpoint.

    POSTs {model, prompt, history: [{speaker, text}]} and expects {text}.
    """

    def __init__(self, url: str, key: str = "", model: str = "", timeout_s: float = 30.0) -> None:
        import httpx

        self._client = httpx.Client(timeout=timeout_s)
        self._url = url
        self._key = key
        self._model = model
        self.identity = f"http:{model or url}"

    def generate(self, prompt_text: str, history: Sequence[Turn]) -> str:
        headers = {}
        if self._key:
            headers["Authorization"] = f"Bearer {self._key}"
        payload = {
            "model": self._model,
            "prompt": prompt_text,
            "history": [{"speaker": t.speaker.value, "text": t.text} for t in history],
        }
        try:
            resp = self._client.post(self._url, json=payload, headers=headers)
            resp.raise_for_status()
            return resp.json()["text"]
        except Exception as exc:  # noqa: BLE001 - surfaced as a typed error
            raise ProviderError(f"generation endpoint failed: {exc}") from exc


def _default_open_done(text: str) -> bool:
    # A substantive open-ended question rather than a short clarifying one.
    return "?" in text and len(text.split()) >= 12


@dataclass(frozen=True)
class FipPolicy:
    max_turns: int = DEFAULT_MAX_TURNS
    answer_probe: str = DEFAULT_ANSWER_PROBE
    open_done: Callable[[str], bool] = _default_open_done

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")


def detect_repetition(transcript: FipTranscript) -> Optional[str]:
    """Diversification instruction when the newest model turn repeats any
    earlier one (token-set similarity at or above 0.9); None otherwise."""
    model_turns = transcript.model_turns()
    if len(model_turns) < 2:
        return None
    latest = model_turns[-1].text
    for earlier in model_turns[:-1]:
        if token_jaccard(latest, earlier.text) >= REPETITION_THRESHOLD:
            return DIVERSIFY_INSTRUCTION
    return None


def run_fip_session(
    goal: QuestionGoal,
    provider: ProviderPort,
    policy: Optional[FipPolicy] = None,
) -> FipTranscript:
    """Drive one flipped-interaction exchange to completion or exhaustion.

    Deterministic given a deterministic provider: logical timestamps, fixed
    probe replies, and a fixed repetition guard. A provider failure is folded
    into the transcript (status PROVIDER_ERROR), never raised.
    """
    policy = policy or FipPolicy()
    transcript = FipTranscript(goal=goal, provider_identity=provider.identity)
    clock = 0

    def say(speaker: Speaker, text: str) -> None:
        nonlocal clock
        transcript.turns.append(Turn(speaker=speaker, text=text, at=clock))
        clock += 1

    say(Speaker.USER, build_flipped_prompt(goal))
    for _ in range(policy.max_turns):
        prompt_text = transcript.turns[-1].text
        try:
            reply = provider.generate(prompt_text, tuple(transcript.turns))
        except ProviderError as exc:
            transcript.status = SessionStatus.PROVIDER_ERROR
            transcript.error = str(exc)
            return transcript
        say(Speaker.MODEL, reply)
        if goal.format in _FORMAT_KIND:
            report = parse_mcq(reply, _FORMAT_KIND[goal.format])
            if report.ok:
                transcript.status = SessionStatus.COMPLETED
                transcript.result = report.question
                return transcript
        elif policy.open_done(reply):
            transcript.status = SessionStatus.COMPLETED
            transcript.result = reply
            return transcript
        # The model is still asking; answer it, diversifying on repetition.
        say(Speaker.USER, detect_repetition(transcript) or policy.answer_probe)
    transcript.status = SessionStatus.MAX_TURNS_EXCEEDED
    return transcript


def consolidate_responses(responses: Sequence[str], provider: ProviderPort) -> list[str]:
    """Summarize class responses into at most ten talking points.

    Duplicate responses are folded before prompting (first occurrence wins);
    the provider is called exactly once and its reply split on lines.
    """
    if not responses:
        raise EmptyInput("no responses to consolidate")
    seen: list[str] = []
    for r in responses:
        if r not in seen:
            seen.append(r)
    prompt = "\n".join(
        [
            "Summarize the following student responses into at most 10 talking points,",
            "one per line, for an in-class discussion:",
            *(f"- {r}" for r in seen),
        ]
    )
    reply = provider.generate(prompt, ())
    points = [line.strip() for line in reply.split("\n") if line.strip()]
    return points[:10]


CUE_TEMPLATES: dict[int, tuple[str, int]] = {
    1: ("How are {} and {} alike?", 2),
    2: ("What are the strengths and weaknesses of {}?", 1),
    3: ("What would happen if {}?", 1),
    4: ("What is the evidence to support {}?", 1),
}


def fill_cue_template(cue_id: int, slots: Sequence[str]) -> str:
    """Fill one of the built-in question-construction cues."""
    if cue_id not in CUE_TEMPLATES:
        raise UnknownCue(f"no cue {cue_id}; known: {sorted(CUE_TEMPLATES)}")
    template, arity = CUE_TEMPLATES[cue_id]
    slots = list(slots)
    if len(slots) != arity:
        raise ArityMismatch(f"cue {cue_id} takes {arity} slot(s), got {len(slots)}")
    return template.format(*slots)
