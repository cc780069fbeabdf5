"""Hour bucketing and the train/evaluate cadence.

Hours count from the stream start, aligned to wall-clock hour boundaries.
After the warm-up, hour h is an evaluation hour iff
(h - warmup_hours) % eval_every == 0; every hour, including evaluation hours
once their scoring pass is done, is trained on, until the stream ends. An
eval_every of 5 walks across all 24 hours of the day.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DataError
from ..types import Session

MIN_HOURS_PAST_WARMUP = 6


@dataclass
class HourBucket:
    hour: int
    sessions: list[Session] = field(default_factory=list)
    click_counts: dict[str, int] = field(default_factory=dict)

    @property
    def clicked_articles(self) -> set[str]:
        return set(self.click_counts)


@dataclass(frozen=True)
class ScheduleStep:
    """Hours to train on, then (optionally) one hour to evaluate before it
    too is trained on."""

    train_hours: tuple[int, ...]
    eval_hour: int | None


def bucket_sessions(sessions: list[Session]) -> tuple[list[HourBucket], float]:
    """Group sessions by start hour; clicked-article sets follow the click
    timestamps, independent of which bucket the session starts in."""
    if not sessions:
        raise DataError("no sessions to bucket")
    start = min(s.start_ts for s in sessions)
    stream_start = float(int(start // 3600) * 3600)
    last_click = max(c.ts for s in sessions for c in s.clicks)
    n_hours = int((last_click - stream_start) // 3600) + 1
    buckets = [HourBucket(hour=h) for h in range(n_hours)]
    for session in sessions:
        h = int((session.start_ts - stream_start) // 3600)
        buckets[h].sessions.append(session)
        for click in session.clicks:
            ch = int((click.ts - stream_start) // 3600)
            if 0 <= ch < n_hours:
                counts = buckets[ch].click_counts
                counts[click.article_id] = counts.get(click.article_id, 0) + 1
    for bucket in buckets:
        bucket.sessions.sort(key=lambda s: (s.start_ts, s.session_id))
    return buckets, stream_start


def build_schedule(
    n_hours: int, warmup_hours: int = 48, eval_every: int = 5
) -> list[ScheduleStep]:
    if warmup_hours < 0 or eval_every < 1:
        raise DataError("warmup_hours must be >= 0 and eval_every >= 1")
    required = warmup_hours + MIN_HOURS_PAST_WARMUP
    if n_hours < required:
        raise DataError(
            f"stream spans {n_hours} hours; need at least {required} "
            f"(warmup {warmup_hours} + {MIN_HOURS_PAST_WARMUP})"
        )
    steps: list[ScheduleStep] = []
    pending: list[int] = []
    for h in range(n_hours):
        if h >= warmup_hours and (h - warmup_hours) % eval_every == 0:
            steps.append(ScheduleStep(train_hours=tuple(pending), eval_hour=h))
            pending = []
        else:
            pending.append(h)
    if pending:
        steps.append(ScheduleStep(train_hours=tuple(pending), eval_hour=None))
    return steps


def eval_hours(schedule: list[ScheduleStep]) -> list[int]:
    return [s.eval_hour for s in schedule if s.eval_hour is not None]
