"""Vetting queue and question bank.

Student submissions enter the bank as Pending entries; a reviewer's verdict
either approves them (with a preliminary difficulty score) or rejects them
(kept for audit, never selectable). Class performance feeds back into the
difficulty score through an exponentially weighted update.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .domain import (
    ActorRef,
    BankQuestion,
    McqQuestion,
    OpenEndedPrompt,
    Role,
    RootQuestion,
    question_from_dict,
    question_to_dict,
)
from .errors import AlreadyDecided, BadParams, OutOfRange, Unauthorized

SIMILARITY_THRESHOLD = 0.8
DIFFICULTY_MIN = 1.0
DIFFICULTY_MAX = 10.0
UPDATE_WEIGHT = 0.25

_TOKEN = re.compile(r"\w+")


def token_jaccard(a: str, b: str) -> float:
    """Jaccard index of the lowercased word-token sets of two texts.

    Symmetric, reflexive (identical texts score 1.0, including empty ones),
    and order-insensitive, so regenerations that reorder clauses still match.
    """
    ta = set(_TOKEN.findall(a.lower()))
    tb = set(_TOKEN.findall(b.lower()))
    if not ta and not tb:
        return 1.0
    union = ta | tb
    return len(ta & tb) / len(union)


class Verdict(str, Enum):
    MATCH = "match"
    MISMATCH = "mismatch"


@dataclass(frozen=True)
class ReproduceCheck:
    similarity: float
    verdict: Verdict


def reproduce_check(submission_text: str, regenerated_text: str) -> ReproduceCheck:
    """Compare a submitted question against the reviewer's fresh regeneration."""
    similarity = token_jaccard(submission_text, regenerated_text)
    verdict = Verdict.MATCH if similarity >= SIMILARITY_THRESHOLD else Verdict.MISMATCH
    return ReproduceCheck(similarity=similarity, verdict=verdict)


class EntryStatus(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"


class Decision(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"


@dataclass
class Provenance:
    author: str
    submission_ref: Optional[str] = None
    provider: Optional[str] = None
    prompts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "author": self.author,
            "submission_ref": self.submission_ref,
            "provider": self.provider,
            "prompts": list(self.prompts),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Provenance":
        return cls(
            author=d["author"],
            submission_ref=d.get("submission_ref"),
            provider=d.get("provider"),
            prompts=list(d.get("prompts", [])),
        )


@dataclass
class Attachment:
    media_type: str
    data: str  # opaque, base64 or plain text; never interpreted

    def to_dict(self) -> dict:
        return {"media_type": self.media_type, "data": self.data}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Attachment":
        return cls(media_type=d["media_type"], data=d["data"])


@dataclass
class BankEntry:
    id: str
    question: BankQuestion
    provenance: Provenance
    status: EntryStatus = EntryStatus.PENDING
    difficulty: Optional[float] = None
    initial_difficulty: Optional[float] = None
    performance: list[tuple[str, float]] = field(default_factory=list)
    topic: Optional[str] = None
    queued_at: float = 0.0
    decided_at: Optional[float] = None
    reviewer: Optional[str] = None
    attachment: Optional[Attachment] = None

    @property
    def selectable(self) -> bool:
        return self.status is EntryStatus.APPROVED

    def kind(self) -> str:
        if isinstance(self.question, McqQuestion):
            return self.question.kind.value
        if isinstance(self.question, RootQuestion):
            return "root"
        return "jitt_quiz"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": question_to_dict(self.question),
            "provenance": self.provenance.to_dict(),
            "status": self.status.value,
            "difficulty": self.difficulty,
            "initial_difficulty": self.initial_difficulty,
            "performance": [[ref, acc] for ref, acc in self.performance],
            "topic": self.topic,
            "queued_at": self.queued_at,
            "decided_at": self.decided_at,
            "reviewer": self.reviewer,
            "attachment": self.attachment.to_dict() if self.attachment else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BankEntry":
        return cls(
            id=d["id"],
            question=question_from_dict(d["question"]),
            provenance=Provenance.from_dict(d["provenance"]),
            status=EntryStatus(d["status"]),
            difficulty=d.get("difficulty"),
            initial_difficulty=d.get("initial_difficulty"),
            performance=[(ref, acc) for ref, acc in d.get("performance", [])],
            topic=d.get("topic"),
            queued_at=d.get("queued_at", 0.0),
            decided_at=d.get("decided_at"),
            reviewer=d.get("reviewer"),
            attachment=Attachment.from_dict(d["attachment"]) if d.get("attachment") else None,
        )


def check_verdict(entry: BankEntry, reviewer: ActorRef, decision: Decision,
                  initial_difficulty: Optional[int]) -> None:
    """Validate a verdict without applying it."""
    if reviewer.role not in (Role.INSTRUCTOR, Role.ASSISTANT):
        raise Unauthorized(f"role {reviewer.role.value} may not record verdicts")
    if entry.status is not EntryStatus.PENDING:
        raise AlreadyDecided(f"entry {entry.id} already {entry.status.value}")
    if decision is Decision.APPROVE:
        if initial_difficulty is None or initial_difficulty != int(initial_difficulty):
            raise BadParams("approval requires an integer initial difficulty")
        if not DIFFICULTY_MIN <= initial_difficulty <= DIFFICULTY_MAX:
            raise BadParams("initial difficulty must be in [1, 10]")


def apply_verdict(entry: BankEntry, reviewer: ActorRef, decision: Decision,
                  initial_difficulty: Optional[int], at: float) -> BankEntry:
    """Record an approve/reject decision on a pending entry (in place)."""
    check_verdict(entry, reviewer, decision, initial_difficulty)
    entry.reviewer = reviewer.id
    entry.decided_at = at
    if decision is Decision.APPROVE:
        entry.status = EntryStatus.APPROVED
        entry.difficulty = float(initial_difficulty)
        entry.initial_difficulty = float(initial_difficulty)
    else:
        entry.status = EntryStatus.REJECTED
    return entry


def observed_difficulty(accuracy: float) -> float:
    """Map a session accuracy in [0,1] onto the 1..10 difficulty scale."""
    return 1.0 + 9.0 * (1.0 - accuracy)


def update_difficulty(entry: BankEntry, session_ref: str, accuracy: float) -> float:
    """Blend class performance into the entry's difficulty score.

    new = (1 - w) * old + w * (1 + 9 * (1 - accuracy)) with w fixed at 0.25.
    Monotone in (1 - accuracy) and always stays inside [1, 10] because it is
    a convex combination of in-range values.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise OutOfRange(f"accuracy {accuracy} outside [0, 1]")
    if entry.difficulty is None:
        raise BadParams(f"entry {entry.id} has no difficulty yet (not approved)")
    observed = observed_difficulty(accuracy)
    entry.difficulty = (1.0 - UPDATE_WEIGHT) * entry.difficulty + UPDATE_WEIGHT * observed
    entry.performance.append((session_ref, accuracy))
    return entry.difficulty


def query_bank(
    entries: Iterable[BankEntry],
    topic: Optional[str] = None,
    band: Optional[tuple[float, float]] = None,
    status: Optional[EntryStatus] = None,
    kind: Optional[str] = None,
) -> list[BankEntry]:
    """Filter entries; deterministic order: newest decision first, ties by id.

    Pending entries order by queue time instead (they have no decision yet).
    """
    out = []
    for e in entries:
        if topic is not None and (e.topic or "").lower() != topic.lower():
            continue
        if band is not None:
            if e.difficulty is None or not band[0] <= e.difficulty <= band[1]:
                continue
        if status is not None and e.status is not status:
            continue
        if kind is not None and e.kind() != kind:
            continue
        out.append(e)
    out.sort(key=lambda e: (-(e.decided_at if e.decided_at is not None else e.queued_at), e.id))
    return out
