"""Core domain records: articles, click events, and sessions.

Timestamps are UTC epoch seconds (float). Optional categorical fields use
the empty string for "absent"; optional integer labels use None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

SESSION_GAP_SECONDS = 30 * 60
MAX_SESSION_LENGTH = 20
MIN_SESSION_LENGTH = 2


@dataclass(frozen=True, slots=True)
class Article:
    """One catalog entry. `title` and `body` are raw text; tokenization is
    the content layer's job."""

    article_id: str
    published_at: float
    category_id: int
    author_id: int | None = None
    title: str = ""
    body: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.published_at):
            raise ValueError(f"article {self.article_id}: published_at not finite")


@dataclass(frozen=True, slots=True)
class ClickEvent:
    """One page view with user/session context."""

    user_id: str
    article_id: str
    ts: float
    device: str = ""
    os: str = ""
    referrer: str = ""
    city: str = ""
    region: str = ""
    country: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.ts):
            raise ValueError(f"click by {self.user_id}: ts not finite")


@dataclass(frozen=True, slots=True)
class Session:
    """Ordered, preprocessed click sequence of one anonymous user.

    Invariants (checked by `validate`): 2 <= length <= 20, clicks strictly
    time-ordered, no repeated article. The 30-minute inactivity bound holds
    on the raw sessionized stream; removing repeated clicks may widen the
    apparent gap between surviving neighbours, so it is not re-checked here.
    """

    session_id: str
    clicks: tuple[ClickEvent, ...]
    start_ts: float = field(default=0.0)

    def __len__(self) -> int:
        return len(self.clicks)

    @property
    def article_ids(self) -> tuple[str, ...]:
        return tuple(c.article_id for c in self.clicks)

    def validate(self) -> None:
        n = len(self.clicks)
        if not (MIN_SESSION_LENGTH <= n <= MAX_SESSION_LENGTH):
            raise ValueError(f"session {self.session_id}: length {n} out of [2, 20]")
        for a, b in zip(self.clicks, self.clicks[1:]):
            if not (a.ts < b.ts):
                raise ValueError(f"session {self.session_id}: clicks not strictly ordered")
        ids = self.article_ids
        if len(set(ids)) != len(ids):
            raise ValueError(f"session {self.session_id}: repeated article")
        if self.clicks and self.start_ts != self.clicks[0].ts:
            raise ValueError(f"session {self.session_id}: start_ts != first click ts")


class Catalog:
    """Article store with stable insertion order and id lookup."""

    def __init__(self, articles: list[Article] | None = None):
        self._by_id: dict[str, Article] = {}
        for a in articles or []:
            self.add(a)

    def add(self, article: Article) -> None:
        if article.article_id in self._by_id:
            raise ValueError(f"duplicate article id {article.article_id}")
        self._by_id[article.article_id] = article

    def __contains__(self, article_id: str) -> bool:
        return article_id in self._by_id

    def __getitem__(self, article_id: str) -> Article:
        return self._by_id[article_id]

    def get(self, article_id: str) -> Article | None:
        return self._by_id.get(article_id)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    @property
    def ids(self) -> list[str]:
        return list(self._by_id.keys())
