"""Core vocabulary: multiple-choice questions, answer keys, grading, actors.

Everything here is an immutable value; instances can be shared freely across
threads and sessions. Grading is exact-set match: a response is correct only
when the chosen labels equal the answer key exactly (no partial credit).
"""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import UnknownItem, UnknownLabel

LABELS = "ABCDEFGH"
MIN_OPTIONS = 2
MAX_OPTIONS = 8


class QuestionKind(str, Enum):
    POLL = "poll"
    CLICKER_QUIZ = "clicker_quiz"
    JITT_QUIZ = "jitt_quiz"


class Role(str, Enum):
    STUDENT = "student"
    INSTRUCTOR = "instructor"
    ASSISTANT = "assistant"
    SYSTEM = "system"


def normalize_text(text: str) -> str:
    """Trim and unicode-NFC-normalize free text."""
    return unicodedata.normalize("NFC", text).strip()


@dataclass(frozen=True)
class McqOption:
    label: str
    text: str


@dataclass(frozen=True)
class McqQuestion:
    """A multiple-choice item with an answer key of one or more labels.

    Invariants enforced at construction:

    * 2..8 options, labelled with consecutive letters starting at A;
    * option texts non-empty after normalization;
    * answer key is a non-empty subset of the option labels;
    * a quiz whose key covers every label must be flagged ``degenerate``
      (polls may be opinion-only, i.e. every option "correct").
    """

    id: str
    stem: str
    options: tuple[McqOption, ...]
    answer_key: frozenset[str]
    kind: QuestionKind
    note: Optional[str] = None
    degenerate: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "stem", normalize_text(self.stem))
        opts = tuple(
            McqOption(opt.label.strip().upper(), normalize_text(opt.text))
            for opt in self.options
        )
        object.__setattr__(self, "options", opts)
        object.__setattr__(self, "answer_key", frozenset(l.strip().upper() for l in self.answer_key))
        if self.note is not None:
            object.__setattr__(self, "note", normalize_text(self.note))
        self._validate()

    def _validate(self) -> None:
        if not self.stem:
            raise ValueError("stem must be non-empty")
        n = len(self.options)
        if not MIN_OPTIONS <= n <= MAX_OPTIONS:
            raise ValueError(f"need {MIN_OPTIONS}..{MAX_OPTIONS} options, got {n}")
        expected = tuple(LABELS[:n])
        got = tuple(opt.label for opt in self.options)
        if got != expected:
            raise ValueError(f"labels must run {expected[0]}..{expected[-1]}, got {got}")
        for opt in self.options:
            if not opt.text:
                raise ValueError(f"option {opt.label} has empty text")
        if not self.answer_key:
            raise ValueError("answer_key must be non-empty")
        labels = self.labels()
        if not self.answer_key <= labels:
            raise ValueError("answer_key contains labels not among the options")
        if self.kind is not QuestionKind.POLL and self.answer_key == labels and not self.degenerate:
            raise ValueError("quiz with all-correct key must be flagged degenerate")

    def labels(self) -> frozenset[str]:
        return frozenset(opt.label for opt in self.options)

    def option_text(self, label: str) -> str:
        for opt in self.options:
            if opt.label == label:
                return opt.text
        raise UnknownLabel(f"no option {label!r}")

    @classmethod
    def create(
        cls,
        stem: str,
        options: Iterable[str],
        answer_key: Iterable[str],
        kind: QuestionKind,
        note: Optional[str] = None,
        degenerate: bool = False,
    ) -> "McqQuestion":
        """Build a question with a content-derived id.

        The id is a hash of the normalized semantic core (kind, stem, options,
        key), so re-parsing a rendered question reproduces the same id.
        """
        texts = list(options)
        if len(texts) > len(LABELS):
            raise ValueError(f"need {MIN_OPTIONS}..{MAX_OPTIONS} options, got {len(texts)}")
        opts = tuple(McqOption(LABELS[i], text) for i, text in enumerate(texts))
        probe = cls(
            id="",
            stem=stem,
            options=opts,
            answer_key=frozenset(answer_key),
            kind=kind,
            note=note,
            degenerate=degenerate,
        )
        return cls(
            id=content_id(probe),
            stem=probe.stem,
            options=probe.options,
            answer_key=probe.answer_key,
            kind=probe.kind,
            note=probe.note,
            degenerate=probe.degenerate,
        )

    def core(self) -> tuple:
        """Semantic identity: everything but the provenance note."""
        return (
            self.kind.value,
            self.stem,
            tuple((o.label, o.text) for o in self.options),
            tuple(sorted(self.answer_key)),
            self.degenerate,
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "stem": self.stem,
            "options": [{"label": o.label, "text": o.text} for o in self.options],
            "answer_key": sorted(self.answer_key),
            "kind": self.kind.value,
            "note": self.note,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "McqQuestion":
        return cls(
            id=d["id"],
            stem=d["stem"],
            options=tuple(McqOption(o["label"], o["text"]) for o in d["options"]),
            answer_key=frozenset(d["answer_key"]),
            kind=QuestionKind(d["kind"]),
            note=d.get("note"),
            degenerate=bool(d.get("degenerate", False)),
        )


def content_id(question: McqQuestion) -> str:
    digest = hashlib.sha1(repr(question.core()).encode("utf-8")).hexdigest()
    return f"q-{digest[:12]}"


@dataclass(frozen=True)
class Grade:
    """Exact-match grading outcome for one question."""

    correct: bool
    matched: frozenset[str]
    missing: frozenset[str]
    spurious: frozenset[str]


def grade_response(question: McqQuestion, chosen: Iterable[str]) -> Grade:
    """Grade a chosen label set against the question's answer key.

    Pure and deterministic; correct iff the chosen set equals the key.
    Raises UnknownLabel if any chosen label is not among the options.
    """
    chosen_set = frozenset(l.strip().upper() for l in chosen)
    labels = question.labels()
    bad = chosen_set - labels
    if bad:
        raise UnknownLabel(f"labels {sorted(bad)} not among options {sorted(labels)}")
    matched = chosen_set & question.answer_key
    missing = question.answer_key - chosen_set
    spurious = chosen_set - question.answer_key
    return Grade(
        correct=not missing and not spurious,
        matched=matched,
        missing=missing,
        spurious=spurious,
    )


@dataclass(frozen=True)
class RootQuestion:
    """A problem solved through several items, each with multiple correct
    answers, where every incorrect option carries a hint shown on a wrong pick.
    """

    id: str
    problem_statement: str
    items: tuple[McqQuestion, ...]
    hints: Mapping[tuple[str, str], str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "problem_statement", normalize_text(self.problem_statement))
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "hints", dict(self.hints))
        if not self.items:
            raise ValueError("root question needs at least one item")
        for item in self.items:
            for opt in item.options:
                if opt.label in item.answer_key:
                    continue
                if (item.id, opt.label) not in self.hints:
                    raise ValueError(
                        f"missing hint for incorrect option {opt.label} of item {item.id}"
                    )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "problem_statement": self.problem_statement,
            "items": [item.to_dict() for item in self.items],
            "hints": [
                {"item": item_id, "label": label, "text": text}
                for (item_id, label), text in sorted(self.hints.items())
            ],
            "root": True,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RootQuestion":
        return cls(
            id=d["id"],
            problem_statement=d["problem_statement"],
            items=tuple(McqQuestion.from_dict(i) for i in d["items"]),
            hints={(h["item"], h["label"]): h["text"] for h in d["hints"]},
        )


@dataclass(frozen=True)
class RootStep:
    solved: bool
    hints: tuple[str, ...] = ()


def step_root_question(
    rq: RootQuestion, progress: Mapping[str, Iterable[str]]
) -> RootStep:
    """Evaluate per-item progress against a root question.

    Solved only when every item has been answered with exactly its key.
    Otherwise returns the hints attached to each wrongly chosen option, in
    item order then label order; untouched items emit no hints. Progress is
    never mutated, so the caller can retry with an amended map.
    """
    known = {item.id for item in rq.items}
    unknown = set(progress) - known
    if unknown:
        raise UnknownItem(f"no items {sorted(unknown)} in root question {rq.id}")
    solved = True
    hints: list[str] = []
    for item in rq.items:
        if item.id not in progress:
            solved = False
            continue
        grade = grade_response(item, progress[item.id])
        if not grade.correct:
            solved = False
            for label in sorted(grade.spurious):
                hints.append(rq.hints[(item.id, label)])
    return RootStep(solved=solved, hints=tuple(hints))


@dataclass(frozen=True)
class ActorRef:
    id: str
    role: Role

    def to_dict(self) -> dict:
        return {"id": self.id, "role": self.role.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActorRef":
        return cls(id=d["id"], role=Role(d["role"]))


@dataclass(frozen=True)
class OpenEndedPrompt:
    """An open-ended question (no options, no machine grading)."""

    id: str
    prompt: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "prompt", normalize_text(self.prompt))
        if not self.prompt:
            raise ValueError("prompt must be non-empty")

    @classmethod
    def create(cls, prompt: str) -> "OpenEndedPrompt":
        norm = normalize_text(prompt)
        digest = hashlib.sha1(norm.encode("utf-8")).hexdigest()
        return cls(id=f"oq-{digest[:12]}", prompt=norm)

    def to_dict(self) -> dict:
        return {"id": self.id, "prompt": self.prompt, "open_ended": True}

    @classmethod
    def from_dict(cls, d: Mapping) -> "OpenEndedPrompt":
        return cls(id=d["id"], prompt=d["prompt"])


AnyQuestion = Union[McqQuestion, OpenEndedPrompt]
BankQuestion = Union[McqQuestion, RootQuestion, OpenEndedPrompt]


def question_to_dict(q: BankQuestion) -> dict:
    return q.to_dict()


def question_from_dict(d: Mapping) -> BankQuestion:
    if d.get("root"):
        return RootQuestion.from_dict(d)
    if d.get("open_ended"):
        return OpenEndedPrompt.from_dict(d)
    return McqQuestion.from_dict(d)
