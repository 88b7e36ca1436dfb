"""Teaching-pace controller.

Tracks two per-course numbers: the pace (content units pushed per session)
and a comprehension estimate (EWMA of quiz accuracies). Pace evolves like a
congestion window: doubling during slow start up to a threshold, additive
increase while outcomes stay strong, multiplicative back-off when a quiz
lands badly, and a dead band in between so mediocre quizzes change nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Optional

from .bank import BankEntry
from .errors import BadParams, OutOfRange

PACE_MIN = 1.0


class PacingMode(str, Enum):
    SLOW_START = "slow_start"
    STEADY = "steady"


@dataclass(frozen=True)
class PacingParams:
    alpha: float = 1.0       # additive increase per strong quiz
    beta: float = 0.5        # multiplicative back-off factor
    theta_hi: float = 0.7    # accuracy at/above which pace grows
    theta_lo: float = 0.5    # accuracy below which pace backs off
    lam: float = 0.5         # comprehension EWMA smoothing
    ssthresh: float = 8.0    # initial slow-start ceiling
    pace_min: float = PACE_MIN

    def validate(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise BadParams(f"beta must be in (0, 1), got {self.beta}")
        if self.alpha <= 0.0:
            raise BadParams(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.theta_lo < self.theta_hi <= 1.0:
            raise BadParams(
                f"need 0 <= theta_lo < theta_hi <= 1, got {self.theta_lo}, {self.theta_hi}"
            )
        if not 0.0 < self.lam <= 1.0:
            raise BadParams(f"lambda must be in (0, 1], got {self.lam}")
        if self.pace_min <= 0.0 or self.ssthresh < self.pace_min:
            raise BadParams("ssthresh must be at least pace_min, both positive")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "theta_hi": self.theta_hi,
            "theta_lo": self.theta_lo,
            "lam": self.lam,
            "ssthresh": self.ssthresh,
            "pace_min": self.pace_min,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PacingParams":
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass(frozen=True)
class PacingState:
    pace: float
    comprehension: float
    mode: PacingMode
    ssthresh: float
    params: PacingParams

    def to_dict(self) -> dict:
        return {
            "pace": self.pace,
            "comprehension": self.comprehension,
            "mode": self.mode.value,
            "ssthresh": self.ssthresh,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PacingState":
        return cls(
            pace=d["pace"],
            comprehension=d["comprehension"],
            mode=PacingMode(d["mode"]),
            ssthresh=d["ssthresh"],
            params=PacingParams.from_dict(d["params"]),
        )


def init_pacing(params: Optional[PacingParams] = None) -> PacingState:
    """Fresh state: minimum pace, slow start, neutral comprehension prior."""
    params = params or PacingParams()
    params.validate()
    return PacingState(
        pace=params.pace_min,
        comprehension=0.5,
        mode=PacingMode.SLOW_START,
        ssthresh=params.ssthresh,
        params=params,
    )


def observe_quiz_outcome(state: PacingState, accuracy: float) -> PacingState:
    """Fold one quiz accuracy into the state.

    Comprehension updates first (EWMA), then the pace rule fires:
    strong + slow start -> double up to ssthresh; strong + steady -> +alpha;
    weak -> cut to beta*pace (never below pace_min) and leave slow start;
    in the dead band the pace is untouched.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise OutOfRange(f"accuracy {accuracy} outside [0, 1]")
    p = state.params
    comprehension = (1.0 - p.lam) * state.comprehension + p.lam * accuracy
    pace = state.pace
    mode = state.mode
    ssthresh = state.ssthresh
    if accuracy >= p.theta_hi:
        if mode is PacingMode.SLOW_START:
            pace = min(2.0 * pace, ssthresh)
            if pace == ssthresh:
                mode = PacingMode.STEADY
        else:
            pace = pace + p.alpha
    elif accuracy < p.theta_lo:
        pace = max(p.pace_min, p.beta * pace)
        ssthresh = max(p.pace_min, pace)
        mode = PacingMode.STEADY
    return replace(state, pace=pace, comprehension=comprehension, mode=mode, ssthresh=ssthresh)


def start_new_topic(state: PacingState) -> PacingState:
    """Re-enter slow start for new material; comprehension carries over."""
    p = state.params
    ssthresh = max(p.pace_min, state.pace / 2.0)
    return replace(state, pace=p.pace_min, ssthresh=ssthresh, mode=PacingMode.SLOW_START)


@dataclass(frozen=True)
class Recommendation:
    item_count: int
    band: tuple[float, float]
    advisory: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "item_count": self.item_count,
            "band": list(self.band),
            "advisory": self.advisory,
        }


def difficulty_band(state: PacingState) -> tuple[float, float]:
    if state.comprehension < state.params.theta_hi:
        return (1.0, 5.0)
    if state.comprehension < 0.85:
        return (4.0, 8.0)
    return (6.0, 10.0)


def recommend_next(state: PacingState, bank_snapshot: Iterable[BankEntry]) -> Recommendation:
    """How many approved items to push next, and from which difficulty band.

    The raw count is the pace rounded half-up, clamped to what the bank can
    actually supply inside the band. An empty eligible set yields a count of
    zero with an advisory rather than an error.
    """
    band = difficulty_band(state)
    eligible = [
        e for e in bank_snapshot
        if e.selectable and e.difficulty is not None and band[0] <= e.difficulty <= band[1]
    ]
    if not eligible:
        return Recommendation(item_count=0, band=band, advisory="EmptyBank")
    count = int(state.pace + 0.5)  # round half-up; pace >= 1 so count >= 1
    return Recommendation(item_count=min(count, len(eligible)), band=band)
