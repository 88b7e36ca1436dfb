from __future__ import annotations

import json
from importlib import resources

import pytest

from flipdeck.domain import McqQuestion, QuestionKind


@pytest.fixture(scope="session")
def demo_fixture() -> dict:
    path = resources.files("flipdeck") / "fixtures" / "boolean_logic_demo.json"
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def demo_rows(demo_fixture) -> dict[str, dict]:
    return {row["name"]: row for row in demo_fixture["rows"]}


@pytest.fixture
def quiz_b() -> McqQuestion:
    """Four-option quiz with key {B}."""
    return McqQuestion.create(
        stem="What is the output of the Boolean expression: NOT (A AND B)?",
        options=["A AND B", "NOT A OR NOT B", "A OR B", "None of the above"],
        answer_key={"B"},
        kind=QuestionKind.CLICKER_QUIZ,
    )


@pytest.fixture
def poll_bc() -> McqQuestion:
    """Four-option poll with key {B, C}."""
    return McqQuestion.create(
        stem="Which of the following Boolean expressions are equivalent to A OR (NOT B)?",
        options=["NOT A AND B", "A AND NOT B", "NOT A OR B", "NOT A AND NOT B"],
        answer_key={"B", "C"},
        kind=QuestionKind.POLL,
    )
