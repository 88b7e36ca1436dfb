"""Plain-text MCQ parsing and canonical rendering.

Grammar accepted by ``parse_mcq``:

* the non-empty lines before the first option line form the stem;
* option lines look like ``A) text`` or ``A. text`` with consecutive labels
  starting at A (at most H);
* an optional trailing parenthesized note of the form
  ``(Note: The correct answer is ...)`` / ``(Note: The correct answers are ...)``
  names the answer key; without it, quizzes fail with NoAnswerKey while polls
  succeed with the full label set (opinion-only).

Parsing is total: malformed input produces a ParseReport failure, never an
exception. Blank lines inside the block and unrecognized trailing lines are
reported as warnings on success.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .domain import LABELS, MAX_OPTIONS, MIN_OPTIONS, McqQuestion, QuestionKind, normalize_text

OPTION_LINE = re.compile(r"^([A-Ha-h])[).]\s+(\S.*)$")
NOTE_LINE = re.compile(
    r"^\(\s*note\s*:\s*the\s+correct\s+answers?\s+(?:is|are)\b(?P<tail>.*)\)\s*$",
    re.IGNORECASE | re.DOTALL,
)
# Labels in a note are read only from list positions: right after the is/are
# verb or after a lowercase conjunction/comma. A letter glued to ")" or "." is
# always a label there; a bare letter counts only when the next token is again
# a separator or the end of the note, so uppercase letters inside quoted
# option text ("NOT (A AND B)") stay put.
_ANCHOR = re.compile(r"(?:\b[Ii][Ss]\b|\b[Aa][Rr][Ee]\b|\band\b|,|&)")
_LABELED = re.compile(r"^\s*\(?([A-H])[).]")
_BARE = re.compile(r"^\s*\(?([A-H])\b(?P<rest>.*)$", re.DOTALL)
_BARE_TERMINATOR = re.compile(r"^\s*(?:$|and\b|,|&|\)|\.)")


class ParseFailure(str, Enum):
    NO_STEM = "NoStem"
    NO_OPTIONS = "NoOptions"
    BAD_LABELS = "BadLabels"
    NO_ANSWER_KEY = "NoAnswerKey"
    DUPLICATE_OPTION = "DuplicateOption"


@dataclass
class ParseReport:
    question: Optional[McqQuestion] = None
    warnings: list[str] = field(default_factory=list)
    failure: Optional[ParseFailure] = None

    @property
    def ok(self) -> bool:
        return self.question is not None


def _note_labels(tail: str) -> list[str]:
    """Extract answer labels from the text after the is/are verb of a note."""
    found: list[str] = []

    def take(label: str) -> None:
        if label not in found:
            found.append(label)

    # The verb itself is the first anchor; scan each anchor's following token.
    for match in _ANCHOR.finditer(" is " + tail):
        rest = (" is " + tail)[match.end():]
        labeled = _LABELED.match(rest)
        if labeled:
            take(labeled.group(1))
            continue
        bare = _BARE.match(rest)
        if bare and _BARE_TERMINATOR.match(bare.group("rest")):
            take(bare.group(1))
    return found


def parse_mcq(text: str, kind: QuestionKind) -> ParseReport:
    """Parse one question block into a McqQuestion, or a named failure."""
    report = ParseReport()
    lines = normalize_text(text).split("\n")

    stem_parts: list[str] = []
    options: list[tuple[str, str]] = []
    trailing: list[str] = []
    note_tail: Optional[str] = None
    note_raw: Optional[str] = None
    seen_blank_inside = False

    stage = "stem"
    pending_blank = False
    for raw in lines:
        line = raw.strip()
        if not line:
            if stage == "options" and options:
                pending_blank = True
            continue
        opt = OPTION_LINE.match(line)
        if opt and stage in ("stem", "options"):
            if pending_blank:
                seen_blank_inside = True
            pending_blank = False
            stage = "options"
            options.append((opt.group(1).upper(), opt.group(2)))
            continue
        pending_blank = False
        if stage == "stem":
            stem_parts.append(line)
            continue
        # Past the options: a note line wins, anything else is trailing junk.
        note = NOTE_LINE.match(line)
        if note and note_tail is None:
            note_tail = note.group("tail")
            note_raw = line
            stage = "done"
        else:
            trailing.append(line)

    if not options:
        report.failure = ParseFailure.NO_OPTIONS
        return report
    if not stem_parts:
        report.failure = ParseFailure.NO_STEM
        return report
    if len(options) < MIN_OPTIONS:
        report.failure = ParseFailure.NO_OPTIONS
        return report

    got = [label for label, _ in options]
    if len(set(got)) != len(got):
        report.failure = ParseFailure.DUPLICATE_OPTION
        return report
    if got != list(LABELS[: len(got)]):
        report.failure = ParseFailure.BAD_LABELS
        return report
    if len(options) > MAX_OPTIONS:
        report.failure = ParseFailure.BAD_LABELS
        return report

    stem = " ".join(stem_parts)
    labels = set(got)
    texts = [normalize_text(t) for _, t in options]
    if len(set(texts)) != len(texts):
        report.warnings.append("duplicate option texts after normalization")

    if note_tail is not None:
        key = [l for l in _note_labels(note_tail) if l in labels]
        if not key:
            if kind is QuestionKind.POLL:
                key = list(got)
                report.warnings.append("answer note names no known option; treating poll as opinion-only")
            else:
                report.failure = ParseFailure.NO_ANSWER_KEY
                return report
    elif kind is QuestionKind.POLL:
        key = list(got)
    else:
        report.failure = ParseFailure.NO_ANSWER_KEY
        return report

    degenerate = False
    if kind is not QuestionKind.POLL and set(key) == labels:
        degenerate = True
        report.warnings.append("every option marked correct; quiz flagged degenerate")

    if seen_blank_inside:
        report.warnings.append("blank line(s) inside the option block")
    for junk in trailing:
        report.warnings.append(f"trailing junk ignored: {junk[:60]}")

    report.question = McqQuestion.create(
        stem=stem,
        options=texts,
        answer_key=key,
        kind=kind,
        note=note_raw,
        degenerate=degenerate,
    )
    return report


def render_mcq(question: McqQuestion) -> str:
    """Render the canonical text form: stem, blank, options, blank, note.

    The note is reconstructed from the answer key (not from any stored note
    text). Opinion-only polls, whose key covers every label, render without a
    note; parsing that back restores the full-label key.
    """
    lines = [question.stem, ""]
    for opt in question.options:
        lines.append(f"{opt.label}) {opt.text}")
    key = sorted(question.answer_key)
    if question.kind is QuestionKind.POLL and question.answer_key == question.labels():
        return "\n".join(lines)
    lines.append("")
    parts = [f"{label}) {question.option_text(label)}" for label in key]
    verb = "answer is" if len(key) == 1 else "answers are"
    lines.append(f"(Note: The correct {verb} {' and '.join(parts)})")
    return "\n".join(lines)
