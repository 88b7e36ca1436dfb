"""Two interchangeable clients for driving a class: directly against the
application core, or over the HTTP API. The simulation driver only talks to
this interface, so the same scripted class can run in-process (fast, for
property suites) or through a real loopback server (end-to-end).
"""

from __future__ import annotations

from typing import Optional, Protocol

import httpx

from ..app import App
from ..bank import EntryStatus
from ..domain import ActorRef, QuestionKind, Role
from ..mcq import parse_mcq
from ..routine import SessionConfig
from .http import entry_view, instance_view, session_view


class ClassClient(Protocol):
    def register(self, actor_id: str, role: str) -> str: ...
    def create_session(self, kind: str, course: str, **config) -> dict: ...
    def open_poll(self, session_id: str, text: str) -> dict: ...
    def open_quiz(self, session_id: str, *, text: Optional[str] = None,
                  bank_entry_id: Optional[str] = None,
                  open_prompt: Optional[str] = None) -> dict: ...
    def vote(self, instance_id: str, actor_id: str, label: str) -> dict: ...
    def respond(self, instance_id: str, actor_id: str, text: str) -> dict: ...
    def chat(self, actor_id: str, *, text: Optional[str] = None,
             callback: Optional[str] = None) -> list: ...
    def close(self, instance_id: str) -> dict: ...
    def advance(self, session_id: str, target: str) -> dict: ...
    def submit(self, session_id: str, actor_id: str, prompts: list[str],
               question_text: str, transcript: Optional[dict] = None) -> dict: ...
    def choose_difficulty(self, session_id: str, actor_id: str, choice: str) -> dict: ...
    def vetting_queue(self) -> list: ...
    def verdict(self, entry_id: str, decision: str,
                difficulty: Optional[int] = None) -> dict: ...
    def bank(self, **filters) -> list: ...
    def init_pacing(self, course: str) -> dict: ...
    def recommendation(self, course: str) -> dict: ...
    def analytics_csv(self, course: str, what: str) -> str: ...
    def consolidate(self, session_id: str) -> dict: ...


INSTRUCTOR = "prof"
ASSISTANT = "ta-1"


class DirectClient:
    """Drives the App in-process; admin operations act as the instructor."""

    def __init__(self, app: App) -> None:
        self.app = app
        from .chat import ChatAdapter

        self._chat = ChatAdapter(app)
        self._viewer = ActorRef(INSTRUCTOR, Role.INSTRUCTOR)

    def register(self, actor_id: str, role: str) -> str:
        _, token = self.app.register_actor(actor_id, role)
        return token

    def create_session(self, kind: str, course: str, **config) -> dict:
        session = self.app.create_session(
            kind, course, INSTRUCTOR, SessionConfig(**config)
        )
        return session_view(session)

    def open_poll(self, session_id: str, text: str) -> dict:
        report = parse_mcq(text, QuestionKind.POLL)
        assert report.ok, report.failure
        return instance_view(self.app.open_poll(session_id, INSTRUCTOR, report.question), self._viewer)

    def open_quiz(self, session_id: str, *, text=None, bank_entry_id=None, open_prompt=None) -> dict:
        question = None
        if open_prompt is not None:
            from ..domain import OpenEndedPrompt

            question = OpenEndedPrompt.create(open_prompt)
        elif text is not None:
            session = self.app.get_session(session_id)
            kind = (
                QuestionKind.JITT_QUIZ
                if session.kind.value == "quiz_prompt_discuss"
                else QuestionKind.CLICKER_QUIZ
            )
            report = parse_mcq(text, kind)
            assert report.ok, report.failure
            question = report.question
        instance = self.app.open_quiz(
            session_id, INSTRUCTOR, question=question, bank_entry_id=bank_entry_id
        )
        return instance_view(instance, self._viewer)

    def vote(self, instance_id: str, actor_id: str, label: str) -> dict:
        return self.app.cast_vote(instance_id, actor_id, [label]).to_dict()

    def respond(self, instance_id: str, actor_id: str, text: str) -> dict:
        self.app.record_open_response(instance_id, actor_id, text)
        return {"ok": True}

    def chat(self, actor_id: str, *, text=None, callback=None) -> list:
        from .chat import ChatInbound

        outbound = self._chat.handle(
            ChatInbound(
                platform="direct",
                chat_id=f"chat-{actor_id}",
                user_ref=actor_id,
                text=text,
                callback_data=callback,
            )
        )
        return [o.to_dict() for o in outbound]

    def close(self, instance_id: str) -> dict:
        return self.app.close_instance(instance_id, INSTRUCTOR).to_dict()

    def advance(self, session_id: str, target: str) -> dict:
        return session_view(self.app.advance_phase(session_id, INSTRUCTOR, target))

    def submit(self, session_id, actor_id, prompts, question_text, transcript=None) -> dict:
        return self.app.submit_student_question(
            session_id, actor_id, prompts, question_text, transcript=transcript
        ).to_dict()

    def choose_difficulty(self, session_id: str, actor_id: str, choice: str) -> dict:
        self.app.choose_difficulty(session_id, actor_id, choice)
        return {"ok": True}

    def vetting_queue(self) -> list:
        return [entry_view(e) for e in self.app.vetting_queue()]

    def verdict(self, entry_id: str, decision: str, difficulty=None) -> dict:
        return entry_view(self.app.record_verdict(entry_id, ASSISTANT, decision, difficulty))

    def bank(self, **filters) -> list:
        if "status" in filters and filters["status"] is not None:
            filters["status"] = EntryStatus(filters["status"])
        return [entry_view(e) for e in self.app.query_bank(**filters)]

    def init_pacing(self, course: str) -> dict:
        return self.app.init_pacing(course, INSTRUCTOR).to_dict()

    def recommendation(self, course: str) -> dict:
        return self.app.recommendation(course).to_dict()

    def analytics_csv(self, course: str, what: str) -> str:
        from .. import analytics as an

        if what == "time-to-answer":
            return an.histogram_csv(an.time_to_answer(self.app.answer_latency_pairs(course)))
        if what == "difficulty":
            return an.difficulty_csv(an.difficulty_stats(self.app.approved_difficulties(course)))
        if what == "leaderboard":
            return an.leaderboard_csv(an.leaderboard(self.app.leaderboard_scores(course)))
        if what == "comprehension":
            return an.comprehension_csv(self.app.comprehension_observations(course))
        raise ValueError(what)

    def consolidate(self, session_id: str) -> dict:
        from ..fip import DigestProvider

        points = self.app.consolidate(session_id, INSTRUCTOR, DigestProvider())
        return {"talking_points": points}


class HttpClient:
    """Drives a running gateway over HTTP; tracks one bearer token per actor."""

    def __init__(self, base_url: str) -> None:
        self._http = httpx.Client(base_url=base_url, timeout=30.0)
        self._tokens: dict[str, str] = {}

    def _headers(self, actor_id: str) -> dict:
        return {"Authorization": f"Bearer {self._tokens[actor_id]}"}

    def _ok(self, response: httpx.Response):
        if response.status_code >= 400:
            raise RuntimeError(f"{response.request.url}: {response.status_code} {response.text}")
        return response.json()

    def register(self, actor_id: str, role: str) -> str:
        # First actor bootstraps itself through the CLI-style deterministic
        # token; later actors are provisioned by the instructor.
        token = f"tok-{actor_id}"
        if actor_id == INSTRUCTOR:
            self._tokens[actor_id] = token
            return token
        body = {"id": actor_id, "role": role}
        data = self._ok(
            self._http.post("/actors", json=body, headers=self._headers(INSTRUCTOR))
        )
        self._tokens[actor_id] = data["token"]
        return data["token"]

    def create_session(self, kind: str, course: str, **config) -> dict:
        body = {"kind": kind, "course": course, **config}
        return self._ok(
            self._http.post("/sessions", json=body, headers=self._headers(INSTRUCTOR))
        )

    def open_poll(self, session_id: str, text: str) -> dict:
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/polls",
                json={"text": text},
                headers=self._headers(INSTRUCTOR),
            )
        )

    def open_quiz(self, session_id: str, *, text=None, bank_entry_id=None, open_prompt=None) -> dict:
        body = {"text": text, "bank_entry_id": bank_entry_id, "open_prompt": open_prompt}
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/quizzes", json=body, headers=self._headers(INSTRUCTOR)
            )
        )

    def vote(self, instance_id: str, actor_id: str, label: str) -> dict:
        return self._ok(
            self._http.post(
                f"/instances/{instance_id}/votes",
                json={"labels": [label]},
                headers=self._headers(actor_id),
            )
        )

    def respond(self, instance_id: str, actor_id: str, text: str) -> dict:
        return self._ok(
            self._http.post(
                f"/instances/{instance_id}/responses",
                json={"text": text},
                headers=self._headers(actor_id),
            )
        )

    def chat(self, actor_id: str, *, text=None, callback=None) -> list:
        body = {
            "platform": "sim",
            "chat_id": f"chat-{actor_id}",
            "user_ref": actor_id,
            "text": text,
            "callback_data": callback,
        }
        return self._ok(self._http.post("/chat/inbound", json=body))

    def close(self, instance_id: str) -> dict:
        return self._ok(
            self._http.post(f"/instances/{instance_id}/close", headers=self._headers(INSTRUCTOR))
        )

    def advance(self, session_id: str, target: str) -> dict:
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/advance",
                json={"target": target},
                headers=self._headers(INSTRUCTOR),
            )
        )

    def submit(self, session_id, actor_id, prompts, question_text, transcript=None) -> dict:
        body = {
            "prompts": prompts,
            "question_text": question_text,
            "transcript": transcript,
        }
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/submissions", json=body, headers=self._headers(actor_id)
            )
        )

    def choose_difficulty(self, session_id: str, actor_id: str, choice: str) -> dict:
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/difficulty",
                json={"choice": choice},
                headers=self._headers(actor_id),
            )
        )

    def vetting_queue(self) -> list:
        return self._ok(self._http.get("/vetting/queue", headers=self._headers(ASSISTANT)))

    def verdict(self, entry_id: str, decision: str, difficulty=None) -> dict:
        body = {"decision": decision, "initial_difficulty": difficulty}
        return self._ok(
            self._http.post(
                f"/vetting/{entry_id}/verdict", json=body, headers=self._headers(ASSISTANT)
            )
        )

    def bank(self, **filters) -> list:
        params = {}
        if filters.get("status") is not None:
            params["status"] = filters["status"]
        if filters.get("kind") is not None:
            params["kind"] = filters["kind"]
        if filters.get("band") is not None:
            params["band_lo"], params["band_hi"] = filters["band"]
        return self._ok(self._http.get("/bank", params=params, headers=self._headers(INSTRUCTOR)))

    def init_pacing(self, course: str) -> dict:
        return self._ok(
            self._http.post(f"/pacing/{course}/init", headers=self._headers(INSTRUCTOR))
        )

    def recommendation(self, course: str) -> dict:
        return self._ok(
            self._http.get(f"/pacing/{course}/recommendation", headers=self._headers(INSTRUCTOR))
        )

    def analytics_csv(self, course: str, what: str) -> str:
        response = self._http.get(
            f"/analytics/{course}/{what}",
            params={"format": "csv"},
            headers=self._headers(INSTRUCTOR),
        )
        if response.status_code >= 400:
            raise RuntimeError(f"analytics {what}: {response.status_code} {response.text}")
        return response.text

    def consolidate(self, session_id: str) -> dict:
        return self._ok(
            self._http.post(
                f"/sessions/{session_id}/consolidate", headers=self._headers(INSTRUCTOR)
            )
        )

    def close_client(self) -> None:
        self._http.close()
