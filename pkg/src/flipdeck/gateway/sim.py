"""Scripted synthetic classes for demos, determinism checks, and end-to-end
runs. The driver speaks only the ClassClient interface, so the identical
command sequence can run in-process or through a live loopback server; with
the same seed both produce byte-identical event logs.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from ..app import App, LogicalClock
from ..events import EventLog
from ..fip import FipPolicy, GoalFormat, QuestionGoal, ScriptedProvider, run_fip_session
from .clients import ASSISTANT, INSTRUCTOR, ClassClient, DirectClient, HttpClient

COURSE = "sim-logic"

# Student-style generated quizzes the scripted provider can "produce".
QUIZ_POOL = [
    "Which value does A AND (NOT A) always produce?\nA) True\nB) False\nC) A\nD) NOT A\n(Note: The correct answer is B) False)",
    "Which gate outputs True only when both inputs are True?\nA) AND\nB) OR\nC) XOR\nD) NOR\n(Note: The correct answer is A) AND)",
    "Which expression equals NOT (A OR B)?\nA) NOT A OR NOT B\nB) NOT A AND NOT B\nC) A AND B\nD) A OR B\n(Note: The correct answer is B) NOT A AND NOT B)",
    "How many rows does a truth table with three inputs have?\nA) 3\nB) 6\nC) 8\nD) 9\n(Note: The correct answer is C) 8)",
    "Which pair of gates is functionally complete on its own?\nA) AND only\nB) OR only\nC) NAND only\nD) XOR only\n(Note: The correct answer is C) NAND only)",
    "What does A XOR A simplify to?\nA) A\nB) True\nC) False\nD) NOT A\n(Note: The correct answer is C) False)",
    "Which law states A OR (A AND B) = A?\nA) Absorption\nB) Distribution\nC) Association\nD) Idempotence\n(Note: The correct answer is A) Absorption)",
    "What is the dual of the expression A AND True?\nA) A OR False\nB) A AND False\nC) NOT A\nD) True\n(Note: The correct answer is A) A OR False)",
]

JITT_MCQ_POOL = [
    "Which single replacement turns a half adder into a full adder?\nA) A second XOR and an OR\nB) One NOT gate\nC) A single AND\nD) Nothing is needed\n(Note: The correct answer is A) A second XOR and an OR)",
    "A circuit outputs True iff an odd number of its three inputs are True. Which gate chain realizes it?\nA) Chained XOR\nB) Chained AND\nC) Chained OR\nD) Chained NAND\n(Note: The correct answer is A) Chained XOR)",
]

OPEN_RESPONSES = [
    "I think the key is that NAND can express negation.",
    "Truth tables make the equivalence obvious.",
    "De Morgan flips the operator and negates the terms.",
    "It reminds me of set complements.",
    "Parity arguments settle the XOR case.",
    "I would draw the circuit first.",
]

CLARIFY = "Which aspect should the quiz emphasize?"


@dataclass
class SimReport:
    students: int
    sessions: int
    seed: int
    pacing_rows: list[str] = field(default_factory=list)
    bank_total: int = 0
    bank_approved: int = 0
    recommendation: Optional[dict] = None
    exports: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [
            f"simulated class: {self.students} students, {self.sessions} sessions, seed {self.seed}",
            f"bank: {self.bank_total} entries, {self.bank_approved} approved",
            f"recommendation: {json.dumps(self.recommendation, sort_keys=True)}",
            "pacing trajectory (session, accuracy, pace, mode, comprehension):",
            *self.pacing_rows,
        ]
        for name, csv_text in sorted(self.exports.items()):
            out.append(f"--- {name} ---")
            out.append(csv_text.rstrip("\n"))
        return out


def _fixture_rows() -> dict[str, dict]:
    path = resources.files("flipdeck") / "fixtures" / "boolean_logic_demo.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    return {row["name"]: row for row in data["rows"]}


def _fip_submission(rng: random.Random, pool: list[str], format: GoalFormat) -> tuple[list[str], str, dict]:
    """Run a scripted flipped-interaction session and package its artifacts."""
    text = rng.choice(pool)
    goal = QuestionGoal(
        topic="Boolean logic",
        focus="operator identities",
        format=format,
        option_count=4 if format is not GoalFormat.JITT_OPEN else None,
    )
    script = [CLARIFY, text] if rng.random() < 0.5 else [text]
    transcript = run_fip_session(goal, ScriptedProvider(script), FipPolicy(max_turns=4))
    prompts = [t.text for t in transcript.turns if t.speaker.value == "user"]
    return prompts, text, transcript.to_dict()


def _vote_label(rng: random.Random, question: dict, p_correct: float) -> str:
    labels = [o["label"] for o in question["options"]]
    key = question.get("answer_key") or labels
    if rng.random() < p_correct:
        return key[0]
    wrong = [l for l in labels if l not in key] or labels
    return rng.choice(wrong)


def run_class(
    client: ClassClient,
    clock: LogicalClock,
    seed: int,
    students: int = 30,
    sessions: int = 2,
    course: str = COURSE,
) -> SimReport:
    rng = random.Random(seed)
    rows = _fixture_rows()
    report = SimReport(students=students, sessions=sessions, seed=seed)
    roster = [f"stu-{i:03d}" for i in range(1, students + 1)]

    client.register(INSTRUCTOR, "instructor")
    client.register(ASSISTANT, "assistant")
    for student in roster:
        client.register(student, "student")
    client.init_pacing(course)

    for cycle in range(sessions):
        clock.tick(3600)
        if cycle % 2 == 0:
            _run_poll_prompt_quiz(client, clock, rng, roster, course, rows, report)
        else:
            _run_quiz_prompt_discuss(client, clock, rng, roster, course, rows, report)

    bank_all = client.bank()
    approved = [e for e in bank_all if e["status"] == "approved"]
    report.bank_total = len(bank_all)
    report.bank_approved = len(approved)
    report.recommendation = client.recommendation(course)
    for what in ("time-to-answer", "difficulty", "leaderboard", "comprehension"):
        try:
            report.exports[what] = client.analytics_csv(course, what)
        except Exception as exc:  # surfaced in the report, not fatal
            report.exports[what] = f"unavailable: {exc}"
    comp = report.exports.get("comprehension", "")
    for line in comp.splitlines()[1:]:
        report.pacing_rows.append(f"  {line}")
    return report


def _vet_pending(client: ClassClient, rng: random.Random) -> None:
    for entry in client.vetting_queue():
        if rng.random() < 0.8:
            client.verdict(entry["id"], "approve", rng.randint(1, 10))
        else:
            client.verdict(entry["id"], "reject")


def _run_poll_prompt_quiz(client, clock, rng, roster, course, rows, report) -> None:
    session = client.create_session("poll_prompt_quiz", course)
    sid = session["id"]
    poll_text = rows["clicker_poll_1"]["text"] if rng.random() < 0.5 else rows["clicker_poll_2"]["text"]
    poll = client.open_poll(sid, poll_text)
    clock.tick(10)
    for student in roster:
        label = _vote_label(rng, poll["question"], p_correct=0.0)
        if rng.random() < 0.3:
            client.chat(student, callback=f"vote:{poll['id']}:{label}")
        else:
            client.vote(poll["id"], student, label)
        if rng.random() < 0.2:
            clock.tick(2)
    client.close(poll["id"])
    client.advance(sid, "prompt_phase")
    clock.tick(60)

    submitters = rng.sample(roster, max(3, len(roster) // 5))
    for student in submitters:
        prompts, text, transcript = _fip_submission(rng, QUIZ_POOL, GoalFormat.CLICKER_QUIZ)
        client.submit(sid, student, prompts, text, transcript=transcript)
    _vet_pending(client, rng)

    rec = client.recommendation(course)
    eligible = client.bank(status="approved", kind="clicker_quiz", band=tuple(rec["band"]))
    if not eligible:
        eligible = client.bank(status="approved", kind="clicker_quiz")
    if eligible:
        quiz = client.open_quiz(sid, bank_entry_id=eligible[0]["id"])
    else:
        quiz = client.open_quiz(sid, text=rows["clicker_quiz_1"]["text"])
    clock.tick(5)
    p_correct = rng.choice([0.9, 0.85, 0.75, 0.6, 0.4])
    for student in roster:
        label = _vote_label(rng, quiz["question"], p_correct)
        client.vote(quiz["id"], student, label)
        if rng.random() < 0.1:
            clock.tick(3)
    client.close(quiz["id"])
    client.advance(sid, "discussed")


def _run_quiz_prompt_discuss(client, clock, rng, roster, course, rows, report) -> None:
    session = client.create_session("quiz_prompt_discuss", course)
    sid = session["id"]
    open_ended = rng.random() < 0.5
    if open_ended:
        jitt = client.open_quiz(sid, open_prompt=rows["jitt_quiz_1"]["text"])
    else:
        jitt = client.open_quiz(sid, text=rng.choice(JITT_MCQ_POOL))
    assert jitt["deadline"] is None

    for student in roster:
        if rng.random() < 0.6:
            choice = "elevated" if rng.random() < 0.4 else "moderate"
            client.chat(student, callback=f"diff:{sid}:{choice}")

    # answers trickle in over the following days
    submitters = set(rng.sample(roster, max(3, len(roster) // 5)))
    p_correct = rng.choice([0.9, 0.8, 0.65])
    for student in roster:
        clock.tick(rng.randint(3600, 2 * 86400))
        if open_ended:
            client.respond(jitt["id"], student, rng.choice(OPEN_RESPONSES))
        else:
            label = _vote_label(rng, jitt["question"], p_correct)
            if rng.random() < 0.3:
                client.chat(student, callback=f"vote:{jitt['id']}:{label}")
            else:
                client.vote(jitt["id"], student, label)
        if student in submitters:
            prompts, text, transcript = _fip_submission(rng, JITT_MCQ_POOL, GoalFormat.CLICKER_QUIZ)
            client.submit(sid, student, prompts, text, transcript=transcript)
    client.close(jitt["id"])
    client.advance(sid, "prompt_phase")
    _vet_pending(client, rng)
    client.consolidate(sid)
    client.advance(sid, "discussed")


# ------------------------------------------------------------- entry points


def _fresh_app(storage_path, fsync: bool = False, snapshot_every: int = 10_000) -> App:
    log = EventLog(storage_path, fsync=fsync)
    app = App(log=log, clock=LogicalClock(), snapshot_every=snapshot_every)
    app.register_actor(INSTRUCTOR, "instructor")
    return app


def simulate_direct(
    storage_path, seed: int, students: int = 30, sessions: int = 2
) -> tuple[App, SimReport]:
    """Run one scripted class in-process against a file-backed log."""
    app = _fresh_app(storage_path)
    report = run_class(DirectClient(app), app.clock, seed, students, sessions)
    return app, report


def simulate_http(
    storage_path, seed: int, students: int = 30, sessions: int = 2
) -> SimReport:
    """Run one scripted class through a real loopback HTTP server.

    The driver shares the server's logical clock (same process), so equal
    seeds still produce byte-identical event logs.
    """
    from .http import build_api

    app = _fresh_app(storage_path)
    api = build_api(app)
    with LoopbackServer(api) as base_url:
        client = HttpClient(base_url)
        try:
            report = run_class(client, app.clock, seed, students, sessions)
        finally:
            client.close_client()
    app.log.close()
    return report


# ----------------------------------------------------------- loopback server


class LoopbackServer:
    """A real uvicorn server on 127.0.0.1, run in a daemon thread."""

    def __init__(self, api, host: str = "127.0.0.1", port: int = 0) -> None:
        import uvicorn

        self._config = uvicorn.Config(api, host=host, port=port, log_level="warning")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def __enter__(self) -> str:
        import time

        self._thread.start()
        while not self._server.started:
            time.sleep(0.01)
        server = self._server.servers[0]
        sock = server.sockets[0]
        host, port = sock.getsockname()[:2]
        return f"http://{host}:{port}"

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
