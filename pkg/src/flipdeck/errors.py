"""Typed errors shared across the service.

Every error carries a stable machine ``code`` (the class name) so the HTTP
gateway and chat adapter can map failures without string matching.
"""

from __future__ import annotations


class FlipdeckError(Exception):
    """Base class for all service errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class ValidationFailure(FlipdeckError):
    """Malformed input that no state transition should ever see."""


class UnknownLabel(ValidationFailure):
    pass


class UnknownItem(ValidationFailure):
    pass


class UnknownCue(ValidationFailure):
    pass


class ArityMismatch(ValidationFailure):
    pass


class EmptyInput(ValidationFailure):
    pass


class BadParams(ValidationFailure):
    pass


class OutOfRange(ValidationFailure):
    pass


class NegativeLatency(ValidationFailure):
    pass


class InvalidSubmission(ValidationFailure):
    pass


class InvalidVote(ValidationFailure):
    pass


class UnknownRef(ValidationFailure):
    """Referenced session/instance/entry/actor does not exist."""


class PhaseViolation(FlipdeckError):
    pass


class AlreadyVoted(FlipdeckError):
    pass


class DeadlineExpired(FlipdeckError):
    pass


class VoteRequired(FlipdeckError):
    pass


class Unauthorized(FlipdeckError):
    pass


class AlreadyDecided(FlipdeckError):
    pass


class ProviderError(FlipdeckError):
    pass


class StorageFailure(FlipdeckError):
    pass


class CorruptRecord(FlipdeckError):
    pass


class ConfigError(FlipdeckError):
    pass
