"""Sessionization by inactivity gap and session preprocessing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..types import (
    MAX_SESSION_LENGTH,
    MIN_SESSION_LENGTH,
    SESSION_GAP_SECONDS,
    ClickEvent,
    Session,
)


@dataclass(frozen=True, slots=True)
class RawSession:
    """A user's consecutive clicks before preprocessing."""

    user_id: str
    clicks: tuple[ClickEvent, ...]

    @property
    def start_ts(self) -> float:
        return self.clicks[0].ts


def sessionize(
    events: Iterable[ClickEvent], gap_seconds: float = SESSION_GAP_SECONDS
) -> list[RawSession]:
    """Split each user's time-ordered clicks wherever the inactivity gap
    reaches `gap_seconds`; emit all sessions sorted by first-click time.

    Pure function: expects events already time-ordered per user (a globally
    ts-sorted stream qualifies).
    """
    per_user: dict[str, list[list[ClickEvent]]] = {}
    for event in events:
        runs = per_user.setdefault(event.user_id, [])
        if runs and event.ts - runs[-1][-1].ts < gap_seconds:
            runs[-1].append(event)
        else:
            runs.append([event])
    sessions = [
        RawSession(user_id=user, clicks=tuple(run))
        for user, runs in per_user.items()
        for run in runs
    ]
    sessions.sort(key=lambda s: (s.start_ts, s.user_id))
    return sessions


def preprocess_session(raw: RawSession, sequence: int = 0) -> Session | None:
    """Repeated-article clicks removed (first kept), then truncated to 20
    clicks, then discarded if fewer than 2 remain."""
    seen: set[str] = set()
    kept: list[ClickEvent] = []
    for click in raw.clicks:
        if click.article_id in seen:
            continue
        seen.add(click.article_id)
        kept.append(click)
    kept = kept[:MAX_SESSION_LENGTH]
    if len(kept) < MIN_SESSION_LENGTH:
        return None
    return Session(
        session_id=f"{raw.user_id}:{sequence}",
        clicks=tuple(kept),
        start_ts=kept[0].ts,
    )


def build_sessions(
    events: Iterable[ClickEvent], gap_seconds: float = SESSION_GAP_SECONDS
) -> list[Session]:
    """sessionize + preprocess, numbering sessions per user in time order."""
    counters: dict[str, int] = {}
    out: list[Session] = []
    for raw in sessionize(events, gap_seconds):
        seq = counters.get(raw.user_id, 0)
        counters[raw.user_id] = seq + 1
        session = preprocess_session(raw, sequence=seq)
        if session is not None:
            out.append(session)
    return out
