from __future__ import annotations

import pytest

from flipdeck.errors import ArityMismatch, EmptyInput, UnknownCue
from flipdeck.fip import (
    DIVERSIFY_INSTRUCTION,
    FipPolicy,
    GoalFormat,
    QuestionGoal,
    ScriptedProvider,
    SessionStatus,
    Speaker,
    build_flipped_prompt,
    consolidate_responses,
    detect_repetition,
    fill_cue_template,
    run_fip_session,
)
from flipdeck.mcq import parse_mcq, render_mcq

CLARIFY = "Which aspect of Boolean logic should the quiz emphasize?"


def quiz_goal(**kw) -> QuestionGoal:
    defaults = dict(
        topic="basic Boolean logic",
        focus="De Morgan's theorem",
        format=GoalFormat.CLICKER_QUIZ,
        option_count=4,
    )
    defaults.update(kw)
    return QuestionGoal(**defaults)


def test_seed_prompt_number_theory_sentence_pair():
    goal = QuestionGoal(
        topic="the fundamental theorem of arithmetic",
        focus="the greatest common denominator",
        format=GoalFormat.CLICKER_QUIZ,
        option_count=4,
    )
    assert build_flipped_prompt(goal) == (
        "Please ask me questions to help me understand the fundamental theorem of "
        "arithmetic. Once you have enough information, create a clicker quiz with "
        "four choices about the greatest common denominator."
    )


def test_seed_prompt_appends_constraints():
    goal = quiz_goal(constraints=("two correct answers",))
    prompt = build_flipped_prompt(goal)
    assert prompt.endswith("Requirement: two correct answers")


def test_seed_prompt_deterministic():
    goal = quiz_goal()
    assert build_flipped_prompt(goal) == build_flipped_prompt(goal)


def test_goal_requires_option_count():
    with pytest.raises(ValueError):
        QuestionGoal(topic="t", format=GoalFormat.CLICKER_QUIZ)
    QuestionGoal(topic="t", format=GoalFormat.JITT_OPEN)  # fine without count


def test_session_completes_on_parseable_turn(demo_rows):
    provider = ScriptedProvider([CLARIFY, demo_rows["clicker_quiz_1"]["text"]])
    transcript = run_fip_session(quiz_goal(), provider)
    assert transcript.status is SessionStatus.COMPLETED
    assert len(transcript.model_turns()) == 2
    assert transcript.result.answer_key == {"B"}


def test_session_max_turns_exceeded():
    provider = ScriptedProvider([CLARIFY + f" ({i})" for i in range(20)])
    transcript = run_fip_session(quiz_goal(), provider, FipPolicy(max_turns=8))
    assert transcript.status is SessionStatus.MAX_TURNS_EXCEEDED
    assert len(transcript.model_turns()) == 8


def test_session_provider_error_keeps_seed():
    provider = ScriptedProvider([], fail_at=0)
    transcript = run_fip_session(quiz_goal(), provider)
    assert transcript.status is SessionStatus.PROVIDER_ERROR
    assert len(transcript.model_turns()) == 0
    assert transcript.turns[0].speaker is Speaker.USER
    assert transcript.turns[0].text.startswith("Please ask me questions")


def test_session_deterministic_transcript(demo_rows):
    script = [CLARIFY, demo_rows["clicker_quiz_1"]["text"]]
    t1 = run_fip_session(quiz_goal(), ScriptedProvider(script))
    t2 = run_fip_session(quiz_goal(), ScriptedProvider(script))
    assert t1.canonical() == t2.canonical()


def test_completed_results_reparse(demo_rows):
    script = [CLARIFY, demo_rows["clicker_quiz_1"]["text"]]
    transcript = run_fip_session(quiz_goal(), ScriptedProvider(script))
    assert transcript.status is SessionStatus.COMPLETED
    again = parse_mcq(render_mcq(transcript.result), transcript.result.kind)
    assert again.ok and again.question.core() == transcript.result.core()


def test_open_goal_completes_on_substantive_question():
    goal = QuestionGoal(topic="universal gate sets", format=GoalFormat.JITT_OPEN)
    final = (
        "With an AND gate and a True constant, which essential gate is still "
        "needed to form a universal set? Explain your viewpoint."
    )
    provider = ScriptedProvider(["Which gates have you covered?", final])
    transcript = run_fip_session(goal, provider)
    assert transcript.status is SessionStatus.COMPLETED
    assert transcript.result == final


def test_repetition_guard_injects_instruction(demo_rows):
    stuck = "What does NOT (A AND B) evaluate to?"
    provider = ScriptedProvider([stuck, stuck, demo_rows["clicker_quiz_1"]["text"]])
    transcript = run_fip_session(quiz_goal(), provider)
    assert transcript.status is SessionStatus.COMPLETED
    user_turns = [t.text for t in transcript.turns if t.speaker is Speaker.USER]
    assert DIVERSIFY_INSTRUCTION in user_turns


def test_detect_repetition_identical_turns():
    goal = quiz_goal()
    provider = ScriptedProvider(["same question?", "same question?"])
    transcript = run_fip_session(goal, provider, FipPolicy(max_turns=2))
    assert detect_repetition(transcript) == DIVERSIFY_INSTRUCTION


def test_detect_repetition_below_threshold():
    # hand token sets: {what,is,not,a,and,b} vs {define,a,truth,table}
    # intersection {a} = 1, union = 9 -> 1/9 well below 0.9
    goal = quiz_goal()
    provider = ScriptedProvider(["What is NOT (A AND B)?", "Define a truth table."])
    transcript = run_fip_session(goal, provider, FipPolicy(max_turns=2))
    assert detect_repetition(transcript) is None


def test_detect_repetition_single_turn_none():
    provider = ScriptedProvider(["only turn?"])
    transcript = run_fip_session(quiz_goal(), provider, FipPolicy(max_turns=1))
    assert detect_repetition(transcript) is None


def test_recorded_provider_replays_transcript(demo_rows):
    from flipdeck.fip import RecordedProvider

    script = [CLARIFY, demo_rows["clicker_quiz_1"]["text"]]
    original = run_fip_session(quiz_goal(), ScriptedProvider(script))
    replayed = run_fip_session(quiz_goal(), RecordedProvider(original.to_dict()))
    assert replayed.status is SessionStatus.COMPLETED
    assert [t.text for t in replayed.model_turns()] == [
        t.text for t in original.model_turns()
    ]
    assert replayed.result.core() == original.result.core()


def test_consolidate_splits_lines():
    provider = ScriptedProvider(["point one\npoint two"])
    points = consolidate_responses(["resp a", "resp b", "resp c"], provider)
    assert points == ["point one", "point two"]


def test_consolidate_dedups_before_prompting():
    captured = {}

    class Capture:
        identity = "capture"

        def generate(self, prompt_text, history):
            captured["prompt"] = prompt_text
            return "ok"

    consolidate_responses(["dup"] * 5, Capture())
    assert captured["prompt"].count("- dup") == 1


def test_consolidate_caps_at_ten():
    provider = ScriptedProvider(["\n".join(f"p{i}" for i in range(15))])
    points = consolidate_responses(["r"], provider)
    assert len(points) == 10


def test_consolidate_empty_input():
    with pytest.raises(EmptyInput):
        consolidate_responses([], ScriptedProvider(["x"]))


def test_cue_templates():
    assert fill_cue_template(1, ["GCD", "XOR"]) == "How are GCD and XOR alike?"
    assert fill_cue_template(2, ["clickers"]) == "What are the strengths and weaknesses of clickers?"
    assert fill_cue_template(3, ["every vote counted twice"]) == (
        "What would happen if every vote counted twice?"
    )
    assert fill_cue_template(4, ["spaced practice"]) == (
        "What is the evidence to support spaced practice?"
    )


def test_cue_errors():
    with pytest.raises(UnknownCue):
        fill_cue_template(9, ["x"])
    with pytest.raises(ArityMismatch):
        fill_cue_template(1, ["only one"])
