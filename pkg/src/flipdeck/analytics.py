"""Read-side statistics over the event log: answer latencies, difficulty
spread, comprehension series, leaderboards, and their CSV export forms.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EmptyInput, NegativeLatency

SECONDS_PER_DAY = 86400


@dataclass
class DaysHistogram:
    buckets: dict[int, int] = field(default_factory=dict)
    n: int = 0
    unanswered: int = 0

    def to_dict(self) -> dict:
        return {
            "buckets": {str(k): v for k, v in sorted(self.buckets.items())},
            "n": self.n,
            "unanswered": self.unanswered,
        }


def time_to_answer(
    assignments: Iterable[tuple[float, Optional[float]]],
) -> DaysHistogram:
    """Bucket answer latencies by whole UTC days.

    day = floor((answered - assigned) / 86400). Pairs with no answer are
    excluded from the buckets and surfaced in the separate unanswered count.
    Raises NegativeLatency if any answer precedes its assignment.
    """
    hist = DaysHistogram()
    for assigned_at, answered_at in assignments:
        if answered_at is None:
            hist.unanswered += 1
            continue
        if answered_at < assigned_at:
            raise NegativeLatency(
                f"answered_at {answered_at} before assigned_at {assigned_at}"
            )
        day = int((answered_at - assigned_at) // SECONDS_PER_DAY)
        hist.buckets[day] = hist.buckets.get(day, 0) + 1
        hist.n += 1
    return hist


@dataclass(frozen=True)
class DifficultyStats:
    mean: float
    variance: float  # population variance (divide by n)
    n: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "n": self.n, "variance_kind": "population"}


def difficulty_stats(values: Sequence[float]) -> DifficultyStats:
    """Mean and population variance of difficulty scores."""
    if not values:
        raise EmptyInput("no difficulty values")
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    return DifficultyStats(mean=mean, variance=variance, n=n)


def leaderboard(scores: Mapping[str, int]) -> list[tuple[int, str, int]]:
    """Competition ranking: equal scores share a rank, the next rank skips.

    Ties are listed in ascending actor-id order.
    """
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    out: list[tuple[int, str, int]] = []
    for i, (actor, score) in enumerate(ordered):
        if i > 0 and score == ordered[i - 1][1]:
            rank = out[-1][0]
        else:
            rank = i + 1
        out.append((rank, actor, score))
    return out


def ewma_series(accuracies: Sequence[float], lam: float = 0.5, prior: float = 0.5) -> list[float]:
    """Running EWMA of quiz accuracies, starting from the prior."""
    out: list[float] = []
    value = prior
    for a in accuracies:
        value = (1.0 - lam) * value + lam * a
        out.append(value)
    return out


@dataclass(frozen=True)
class ComprehensionPoint:
    session_ref: str
    accuracy: float
    ewma: float

    def to_dict(self) -> dict:
        return {"session": self.session_ref, "accuracy": self.accuracy, "ewma": self.ewma}


def comprehension_series(
    observations: Sequence[tuple[str, float]], lam: float = 0.5, prior: float = 0.5
) -> list[ComprehensionPoint]:
    """Per-quiz class accuracy with the pacing EWMA alongside, in event order."""
    ewmas = ewma_series([a for _, a in observations], lam=lam, prior=prior)
    return [
        ComprehensionPoint(session_ref=ref, accuracy=acc, ewma=ewma)
        for (ref, acc), ewma in zip(observations, ewmas)
    ]


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def histogram_csv(hist: DaysHistogram) -> str:
    return _csv(["day", "count"], sorted(hist.buckets.items()))


def difficulty_csv(stats: DifficultyStats) -> str:
    return _csv(["mean", "variance", "n"], [[stats.mean, stats.variance, stats.n]])


def leaderboard_csv(rows: Sequence[tuple[int, str, int]]) -> str:
    return _csv(["rank", "actor", "score"], rows)


def comprehension_csv(points: Sequence[ComprehensionPoint]) -> str:
    return _csv(
        ["session", "accuracy", "ewma"],
        [[p.session_ref, p.accuracy, p.ewma] for p in points],
    )
