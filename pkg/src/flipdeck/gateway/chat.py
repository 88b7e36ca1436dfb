"""Platform-agnostic chat webhook adapter.

Inbound messages carry either free text or a button callback:

* ``vote:<instance>:<label>`` casts a vote and, when accepted, replies with
  the tally the voter is now allowed to see;
* ``diff:<session>:<moderate|elevated>`` stores a difficulty preference;
* free text ``quiz`` shows the newest open question with vote buttons;
* any other free text while a session accepts submissions is appended to
  the sender's draft; the word ``submit`` files the draft (all lines but the
  last are prompts, the last line is the question).

Errors never escape: they become polite outbound messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..app import App
from ..domain import Role
from ..errors import AlreadyVoted, FlipdeckError
from ..routine import DifficultyChoice, QuestionInstance

MISUNDERSTOOD = "I didn't understand that choice."


@dataclass
class ChatInbound:
    platform: str
    chat_id: str
    user_ref: str
    text: Optional[str] = None
    callback_data: Optional[str] = None

    def validate(self) -> Optional[str]:
        if (self.text is None) == (self.callback_data is None):
            return "Send either text or a button press, not both."
        return None


@dataclass
class ChatOutbound:
    chat_id: str
    text: str
    buttons: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"chat_id": self.chat_id, "text": self.text, "buttons": self.buttons}


def _vote_buttons(instance: QuestionInstance) -> list[dict]:
    if instance.open_ended:
        return []
    return [
        {"label": opt.label, "callback_data": f"vote:{instance.id}:{opt.label}"}
        for opt in instance.question.options
    ]


def _question_text(instance: QuestionInstance) -> str:
    if instance.open_ended:
        return instance.question.prompt
    q = instance.question
    lines = [q.stem] + [f"{o.label}) {o.text}" for o in q.options]
    return "\n".join(lines)


def _tally_text(app: App, instance_id: str, actor_id: str) -> str:
    tally = app.view_tally(instance_id, actor_id)
    lines = [f"Results so far ({len(tally.voters)} vote(s)):"]
    for label in sorted(tally.counts):
        lines.append(f"{label}: {tally.counts[label]}")
    if not tally.counts:
        lines.append("no votes yet")
    return "\n".join(lines)


class ChatAdapter:
    def __init__(self, app: App) -> None:
        self._app = app

    def _actor_for(self, msg: ChatInbound) -> str:
        actor = self._app.state.actors.get(msg.user_ref)
        if actor is None:
            self._app.register_actor(msg.user_ref, Role.STUDENT)
        return msg.user_ref

    def handle(self, msg: ChatInbound) -> list[ChatOutbound]:
        problem = msg.validate()
        if problem:
            return [ChatOutbound(msg.chat_id, problem)]
        actor_id = self._actor_for(msg)
        try:
            if msg.callback_data is not None:
                return self._handle_callback(msg, actor_id)
            return self._handle_text(msg, actor_id)
        except FlipdeckError as exc:
            return [ChatOutbound(msg.chat_id, f"Sorry, that didn't work: {exc} [{exc.code}]")]

    def _handle_callback(self, msg: ChatInbound, actor_id: str) -> list[ChatOutbound]:
        parts = (msg.callback_data or "").split(":")
        if len(parts) == 3 and parts[0] == "vote":
            _, instance_id, label = parts
            if len(label) != 1 or not label.isalpha():
                return [ChatOutbound(msg.chat_id, MISUNDERSTOOD)]
            try:
                self._app.cast_vote(instance_id, actor_id, [label.upper()])
            except AlreadyVoted:
                return [ChatOutbound(msg.chat_id, "Your vote is already recorded.")]
            return [
                ChatOutbound(msg.chat_id, f"Vote for {label.upper()} recorded."),
                ChatOutbound(msg.chat_id, _tally_text(self._app, instance_id, actor_id)),
            ]
        if len(parts) == 3 and parts[0] == "diff":
            _, session_id, choice = parts
            if choice not in (DifficultyChoice.MODERATE.value, DifficultyChoice.ELEVATED.value):
                return [ChatOutbound(msg.chat_id, MISUNDERSTOOD)]
            self._app.choose_difficulty(session_id, actor_id, choice)
            return [ChatOutbound(msg.chat_id, f"Difficulty preference set to {choice}.")]
        return [ChatOutbound(msg.chat_id, MISUNDERSTOOD)]

    def _handle_text(self, msg: ChatInbound, actor_id: str) -> list[ChatOutbound]:
        text = (msg.text or "").strip()
        if not text:
            return [ChatOutbound(msg.chat_id, MISUNDERSTOOD)]
        lowered = text.lower()
        if lowered in ("quiz", "poll", "current"):
            return self._current_question(msg)
        if lowered == "submit":
            return self._file_draft(msg, actor_id)
        return self._append_draft(msg, actor_id, text)

    def _current_question(self, msg: ChatInbound) -> list[ChatOutbound]:
        newest: Optional[QuestionInstance] = None
        for _, instance in sorted(self._app.state.instances.items()):
            if not instance.closed:
                newest = instance
        if newest is None:
            return [ChatOutbound(msg.chat_id, "Nothing is open right now.")]
        return [
            ChatOutbound(msg.chat_id, _question_text(newest), buttons=_vote_buttons(newest))
        ]

    def _submission_session(self) -> Optional[str]:
        for sid, session in sorted(self._app.state.sessions.items(), reverse=True):
            try:
                session.check_submission_phase()
                return sid
            except FlipdeckError:
                continue
        return None

    def _append_draft(self, msg: ChatInbound, actor_id: str, text: str) -> list[ChatOutbound]:
        if self._submission_session() is None:
            return [
                ChatOutbound(
                    msg.chat_id,
                    "No session is collecting submissions right now; try again during the prompt phase.",
                )
            ]
        draft = self._app.append_chat_draft(actor_id, text)
        return [
            ChatOutbound(
                msg.chat_id,
                f"Added to your draft ({len(draft)} line(s)). "
                "Send more prompt lines, finish with the question line, then send 'submit'.",
            )
        ]

    def _file_draft(self, msg: ChatInbound, actor_id: str) -> list[ChatOutbound]:
        session_id = self._submission_session()
        if session_id is None:
            return [ChatOutbound(msg.chat_id, "No session is collecting submissions right now.")]
        submission = self._app.file_chat_draft(actor_id, session_id)
        return [
            ChatOutbound(
                msg.chat_id,
                f"Submission {submission.id} filed for review. Thank you!",
            )
        ]
