"""flipdeck: classroom-flipping orchestration service.

Runs clicker poll/quiz routines as event-sourced state machines, drives
flipped-interaction question generation against pluggable text providers,
vets and banks student-authored questions, and paces instruction with an
additive-increase/multiplicative-decrease controller.
"""

__version__ = "0.1.0"
