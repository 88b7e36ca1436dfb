"""Acceptance suite: one test per release criterion, each printing a PASS
line with its runtime and enforcing its budget. Expected values come from
independent oracles (brute force, hand arithmetic, a straight-line reference
simulator) or from the shipped fixture texts.
"""

from __future__ import annotations

import random
import time

from flipdeck.app import App, LogicalClock
from flipdeck.domain import McqQuestion, QuestionKind, Role
from flipdeck.errors import (
    AlreadyVoted,
    DeadlineExpired,
    InvalidSubmission,
    InvalidVote,
    PhaseViolation,
    Unauthorized,
    UnknownLabel,
    VoteRequired,
)
from flipdeck.events import EventLog
from flipdeck.mcq import parse_mcq, render_mcq
from flipdeck.routine import Phase, SessionConfig, SessionKind

from reference_pacing import reference_trajectory
from test_analytics import brute_force_days, brute_force_ranking
from test_mcq import random_question


class budget:
    """Context manager asserting a wall-clock budget and printing the line."""

    def __init__(self, name: str, seconds: float) -> None:
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        print(f"{status} {self.name} ({elapsed:.2f}s, budget {self.seconds:.0f}s)")
        if exc_type is None:
            assert elapsed < self.seconds, f"{self.name} exceeded budget: {elapsed:.2f}s"
        return False


# ---------------------------------------------------------------- criterion 1


def test_acceptance_parser_fixtures(demo_rows):
    with budget("parser-fixtures", 1.0):
        expectations = [
            ("clicker_poll_1", QuestionKind.POLL,
             "What is the output of the Boolean expression: NOT (A AND B)?", 2, {"A", "B"}),
            ("clicker_poll_2", QuestionKind.POLL,
             "Which of the following Boolean expressions are equivalent to A OR (NOT B)?",
             4, {"B", "C"}),
            ("clicker_quiz_1", QuestionKind.CLICKER_QUIZ,
             "What is the output of the Boolean expression: NOT (A AND B)?", 4, {"B"}),
            ("clicker_quiz_2", QuestionKind.CLICKER_QUIZ,
             "Which expression represents De Morgan's Theorem for three Boolean variables (A, B, and C)?",
             4, {"B"}),
        ]
        parsed = []
        for name, kind, stem, option_count, key in expectations:
            report = parse_mcq(demo_rows[name]["text"], kind)
            assert report.ok, (name, report.failure)
            q = report.question
            assert q.stem == stem, name
            assert len(q.options) == option_count, name
            assert q.answer_key == key, name
            parsed.append(q)
        # round-trip structural identity: fixtures plus 1,000 seeded questions
        rng = random.Random(777)
        for q in parsed + [random_question(rng) for _ in range(1000)]:
            back = parse_mcq(render_mcq(q), q.kind)
            assert back.ok
            assert back.question.core() == q.core()


# ---------------------------------------------------------------- criterion 2

_SEQ_LABELS = "ABCD"


def _fresh_routine_app() -> App:
    app = App(clock=LogicalClock())
    app.register_actor("prof", "instructor")
    app.register_actor("ta-1", "assistant")
    for i in range(4):
        app.register_actor(f"stu-{i}", "student")
    return app


def _mcq(rng: random.Random, kind: QuestionKind) -> McqQuestion:
    n = rng.randint(2, 4)
    labels = _SEQ_LABELS[:n]
    key = {rng.choice(labels)}
    return McqQuestion.create(
        f"pick one of {n}?", [f"opt-{l}" for l in labels], key, kind
    )


def _check_invariants(app: App, tracker: dict) -> None:
    for iid, instance in app.state.instances.items():
        if instance.open_ended:
            continue
        counts_sum = sum(instance.counts.values())
        assert counts_sum == len(instance.votes), "tally conservation violated"
        prev_counts, prev_voters, was_closed = tracker.get(iid, ({}, 0, False))
        for label, count in prev_counts.items():
            assert instance.counts.get(label, 0) >= count, "counts shrank"
        assert len(instance.votes) >= prev_voters, "voter set shrank"
        if was_closed:
            assert instance.counts == prev_counts, "closed tally changed"
        if instance.deadline is not None:
            assert all(at <= instance.deadline for at in instance.vote_times.values()), (
                "vote accepted after deadline"
            )
        tracker[iid] = (dict(instance.counts), len(instance.votes), instance.closed)
    for session in app.state.sessions.values():
        order = [p.value for p in session.order()]
        indices = [order.index(p) for p in session.phase_history]
        assert indices == sorted(indices), "phase went backwards"
        assert len(set(indices)) == len(indices), "phase revisited"


def _random_command(app: App, rng: random.Random) -> None:
    """Execute one random command; assert the exact outcome class."""
    students = [f"stu-{i}" for i in range(4)]
    sessions = list(app.state.sessions.values())
    instances = [i for i in app.state.instances.values()]
    move = rng.random()

    if move < 0.08 or not sessions:
        kind = rng.choice(list(SessionKind))
        app.create_session(kind, "prop", "prof",
                           SessionConfig(prompt_phase_enabled=rng.random() < 0.7))
        return

    session = rng.choice(sessions)
    if move < 0.16:
        legal = session.kind is SessionKind.POLL_PROMPT_QUIZ and session.phase is Phase.CREATED
        try:
            app.open_poll(session.id, "prof", _mcq(rng, QuestionKind.POLL))
            assert legal
        except PhaseViolation:
            assert not legal
        return
    if move < 0.24:
        if session.kind is SessionKind.POLL_PROMPT_QUIZ:
            legal = session.phase in (Phase.POLL_CLOSED, Phase.PROMPT_PHASE)
            question = _mcq(rng, QuestionKind.CLICKER_QUIZ)
        else:
            legal = session.phase is Phase.CREATED
            question = _mcq(rng, QuestionKind.JITT_QUIZ)
        try:
            app.open_quiz(session.id, "prof", question)
            assert legal
        except PhaseViolation:
            assert not legal
        return
    if move < 0.30:
        app.clock.tick(rng.choice([1, 10, 60, 200, 400]))
        return
    if move < 0.58 and instances:
        instance = rng.choice(instances)
        actor = rng.choice(students + (["prof"] if rng.random() < 0.1 else []))
        labels = [rng.choice(_SEQ_LABELS[:6])]
        flavor = rng.random()
        if flavor < 0.08:
            labels = ["A", "B"]  # arity violation
        at = app.clock.now()
        # expected error, mirroring the declared check precedence:
        # closed, then role, then re-vote, then arity, then label, then deadline
        expected = None
        if instance.closed:
            expected = PhaseViolation
        elif actor == "prof":
            expected = Unauthorized
        elif actor in instance.votes:
            expected = AlreadyVoted
        elif len(labels) != 1:
            expected = InvalidVote
        elif labels[0] not in instance.question.labels():
            expected = UnknownLabel
        elif instance.deadline is not None and at > instance.deadline:
            expected = DeadlineExpired
        try:
            app.cast_vote(instance.id, actor, labels)
            assert expected is None, f"expected {expected.__name__}"
        except (Unauthorized, InvalidVote, PhaseViolation, AlreadyVoted,
                UnknownLabel, DeadlineExpired) as exc:
            assert expected is not None and isinstance(exc, expected), (
                f"wrong error {type(exc).__name__}, wanted "
                f"{expected.__name__ if expected else 'success'}"
            )
        return
    if move < 0.68 and instances:
        instance = rng.choice(instances)
        actor = rng.choice(students + ["prof", "ta-1"])
        actor_ref = app.state.actors[actor]
        gated = (
            actor_ref.role is Role.STUDENT
            and not instance.closed
            and actor not in instance.votes
        )
        try:
            tally = app.view_tally(instance.id, actor)
            assert not gated, "gate failed to hold"
            assert sum(tally.counts.values()) == len(tally.voters)
        except VoteRequired:
            assert gated, "gate fired for an allowed viewer"
        return
    if move < 0.76 and instances:
        instance = rng.choice(instances)
        try:
            app.close_instance(instance.id, "prof")
            assert not instance.closed or True
        except PhaseViolation:
            pass  # double close
        return
    if move < 0.86:
        target = rng.choice([Phase.PROMPT_PHASE, Phase.DISCUSSED, Phase.CONSOLIDATED])
        try:
            app.advance_phase(session.id, "prof", target)
        except PhaseViolation:
            pass
        return
    if move < 0.93:
        legal = (
            session.kind is SessionKind.QUIZ_PROMPT_DISCUSS
            and session.phase is Phase.JITT_OPEN
        )
        try:
            app.choose_difficulty(session.id, rng.choice(students),
                                  rng.choice(["moderate", "elevated"]))
            assert legal
        except PhaseViolation:
            assert not legal
        return
    # submissions: sometimes deliberately invalid (no prompts)
    prompts = [] if rng.random() < 0.2 else ["make one"]
    if session.kind is SessionKind.POLL_PROMPT_QUIZ:
        legal_phase = session.phase is Phase.PROMPT_PHASE
    else:
        legal_phase = session.phase in (Phase.JITT_OPEN, Phase.PROMPT_PHASE)
    try:
        app.submit_student_question(
            session.id, rng.choice(students), prompts,
            "Q?\nA) x\nB) y\n(Note: The correct answer is A)",
        )
        assert legal_phase and prompts
    except PhaseViolation:
        assert not legal_phase
    except InvalidSubmission:
        assert not prompts


def test_acceptance_routine_property_suite():
    with budget("routine-state-machine", 30.0):
        master = random.Random(20240817)
        for i in range(10_000):
            rng = random.Random(master.randrange(2**63))
            app = _fresh_routine_app()
            tracker: dict = {}
            for _ in range(rng.randint(4, 12)):
                _random_command(app, rng)
                _check_invariants(app, tracker)


# ---------------------------------------------------------------- criterion 3


def test_acceptance_replay_determinism(tmp_path):
    from flipdeck.gateway.sim import simulate_direct, simulate_http

    with budget("replay-determinism", 60.0):
        for seed in range(100):
            path = tmp_path / f"class-{seed}" / "events.log"
            app, _ = simulate_direct(path, seed=seed, students=8, sessions=2)
            live = app.canonical_state()
            app.log.close()
            rebuilt = App.rebuild(EventLog(path, fsync=False), use_snapshot=False)
            assert rebuilt.canonical_state() == live, f"seed {seed} diverged on rebuild"
        # equal seeds, equal bytes: in-process and over the real HTTP loopback
        a, _ = simulate_direct(tmp_path / "d1.log", seed=4242, students=10, sessions=2)
        a.log.close()
        b, _ = simulate_direct(tmp_path / "d2.log", seed=4242, students=10, sessions=2)
        b.log.close()
        assert (tmp_path / "d1.log").read_bytes() == (tmp_path / "d2.log").read_bytes()
        simulate_http(tmp_path / "h1.log", seed=4242, students=10, sessions=2)
        simulate_http(tmp_path / "h2.log", seed=4242, students=10, sessions=2)
        h1 = (tmp_path / "h1.log").read_bytes()
        assert h1 == (tmp_path / "h2.log").read_bytes()
        assert h1 == (tmp_path / "d1.log").read_bytes()


# ---------------------------------------------------------------- criterion 4


def test_acceptance_pacing_oracle_equivalence():
    from flipdeck.pacing import PacingMode, init_pacing, observe_quiz_outcome

    with budget("pacing-oracle", 5.0):
        rng = random.Random(515151)
        for _ in range(1000):
            accuracies = [rng.random() for _ in range(rng.randint(1, 50))]
            state = init_pacing()
            trajectory = []
            for a in accuracies:
                state = observe_quiz_outcome(state, a)
                trajectory.append(
                    (state.pace, state.comprehension, state.mode.value, state.ssthresh)
                )
            assert trajectory == reference_trajectory(accuracies)  # zero tolerance
        # sawtooth: k strong quizzes from steady pace p0 add exactly k*alpha
        for k in range(1, 12):
            state = init_pacing()
            for _ in range(3):
                state = observe_quiz_outcome(state, 1.0)  # reach ssthresh, go steady
            p0 = state.pace
            assert state.mode is PacingMode.STEADY
            for _ in range(k):
                state = observe_quiz_outcome(state, 0.9)
            assert state.pace == p0 + k * 1.0
        # the worked slow-start trace with a back-off cut at beta = 0.5
        state = init_pacing()
        paces = []
        for a in (0.9, 0.9, 0.9, 0.9, 0.2):
            state = observe_quiz_outcome(state, a)
            paces.append(state.pace)
        assert paces == [2.0, 4.0, 8.0, 9.0, 4.5]
        assert state.ssthresh == 4.5


# ---------------------------------------------------------------- criterion 5


def test_acceptance_analytics():
    from flipdeck.analytics import difficulty_stats, leaderboard, time_to_answer

    with budget("analytics", 10.0):
        assert difficulty_stats([1, 9]).mean == 5
        assert difficulty_stats([1, 9]).variance == 16
        assert abs(difficulty_stats([4, 5, 6]).variance - 2 / 3) < 1e-12
        rng = random.Random(606)
        pairs = []
        for _ in range(1000):
            assigned = rng.uniform(0, 20 * 86400)
            pairs.append((assigned, assigned + rng.uniform(0, 15 * 86400)))
        hist = time_to_answer(pairs)
        expected: dict[int, int] = {}
        for assigned, answered in pairs:
            day = brute_force_days(assigned, answered)
            expected[day] = expected.get(day, 0) + 1
        assert hist.buckets == expected and hist.n == 1000
        for _ in range(1000):
            scores = {f"a{i:02d}": rng.randint(0, 8) for i in range(rng.randint(0, 15))}
            assert leaderboard(scores) == brute_force_ranking(scores)


# ---------------------------------------------------------------- criterion 6


def test_acceptance_fip_loop(demo_rows):
    from flipdeck.fip import (
        DIVERSIFY_INSTRUCTION,
        FipPolicy,
        GoalFormat,
        QuestionGoal,
        ScriptedProvider,
        SessionStatus,
        Speaker,
        run_fip_session,
    )

    with budget("fip-loop", 2.0):
        goal = QuestionGoal(
            topic="Boolean logic", focus="De Morgan",
            format=GoalFormat.CLICKER_QUIZ, option_count=4,
        )
        quiz_text = demo_rows["clicker_quiz_1"]["text"]
        # completed, deterministic, result re-parses
        for _ in range(3):
            t = run_fip_session(goal, ScriptedProvider(["clarify me?", quiz_text]))
            assert t.status is SessionStatus.COMPLETED
            back = parse_mcq(render_mcq(t.result), t.result.kind)
            assert back.ok and back.question.core() == t.result.core()
        first = run_fip_session(goal, ScriptedProvider(["clarify me?", quiz_text])).canonical()
        second = run_fip_session(goal, ScriptedProvider(["clarify me?", quiz_text])).canonical()
        assert first == second
        # exhaustion
        t = run_fip_session(goal, ScriptedProvider([f"q{i}?" for i in range(9)]),
                            FipPolicy(max_turns=8))
        assert t.status is SessionStatus.MAX_TURNS_EXCEEDED
        assert len(t.model_turns()) == 8
        # provider failure
        t = run_fip_session(goal, ScriptedProvider([], fail_at=0))
        assert t.status is SessionStatus.PROVIDER_ERROR and not t.model_turns()
        # repetition guard injects the diversification instruction
        t = run_fip_session(
            goal, ScriptedProvider(["same thing?", "same thing?", quiz_text])
        )
        users = [turn.text for turn in t.turns if turn.speaker is Speaker.USER]
        assert DIVERSIFY_INSTRUCTION in users
        assert t.status is SessionStatus.COMPLETED


# ---------------------------------------------------------------- criterion 7


def test_acceptance_vetting():
    from flipdeck.bank import (
        EntryStatus,
        Verdict,
        reproduce_check,
        token_jaccard,
        update_difficulty,
    )
    from test_bank import _entry

    with budget("vetting", 10.0):
        rng = random.Random(99)
        words = ["gate", "xor", "and", "not", "truth", "table", "box", "chip"]
        for _ in range(2000):
            a = " ".join(rng.choices(words, k=rng.randint(0, 6)))
            b = " ".join(rng.choices(words, k=rng.randint(0, 6)))
            assert token_jaccard(a, b) == token_jaccard(b, a)
            assert token_jaccard(a, a) == 1.0
            assert 0.0 <= token_jaccard(a, b) <= 1.0
        shuffled = "alpha beta gamma delta"
        assert token_jaccard(shuffled, "delta gamma beta alpha") == 1.0
        assert token_jaccard("alpha beta", "gamma delta") == 0.0
        # threshold boundary: 4/5 token overlap matches, 3/5 does not
        at_boundary = reproduce_check("one two three four five", "one two three four")
        assert at_boundary.similarity == 0.8 and at_boundary.verdict is Verdict.MATCH
        below = reproduce_check("one two three four five", "one two three")
        assert below.similarity == 0.6 and below.verdict is Verdict.MISMATCH
        # monotone difficulty update over random (difficulty, accuracy) pairs
        for _ in range(10_000):
            d = rng.uniform(1, 10)
            lo, hi = sorted((rng.random(), rng.random()))
            e1 = _entry(difficulty=d, status=EntryStatus.APPROVED)
            e2 = _entry(difficulty=d, status=EntryStatus.APPROVED)
            assert update_difficulty(e1, "s", lo) >= update_difficulty(e2, "s", hi)
            assert 1.0 <= e1.difficulty <= 10.0 and 1.0 <= e2.difficulty <= 10.0


# ---------------------------------------------------------------- criterion 8


def test_acceptance_end_to_end_headless(tmp_path):
    from flipdeck.gateway.sim import simulate_http

    with budget("end-to-end-headless", 120.0):
        report = simulate_http(tmp_path / "e2e.log", seed=7, students=30, sessions=2)
        assert report.students == 30
        assert report.bank_total > 0 and report.bank_approved > 0
        assert report.recommendation is not None
        assert report.recommendation["band"]
        for what in ("time-to-answer", "difficulty", "leaderboard", "comprehension"):
            assert what in report.exports
            assert not report.exports[what].startswith("unavailable"), report.exports[what]
        assert report.exports["time-to-answer"].splitlines()[0] == "day,count"
        assert len(report.exports["comprehension"].splitlines()) >= 2
        board = report.exports["leaderboard"].splitlines()
        assert board[0] == "rank,actor,score" and len(board) == 31
