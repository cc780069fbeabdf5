"""Shared fixtures: tiny corpora and session builders."""

from __future__ import annotations

import numpy as np
import pytest

from newsrec.types import Article, Catalog, ClickEvent, Session


def make_article(article_id: str, published_at: float = 0.0, category: int = 0, **kw) -> Article:
    return Article(
        article_id=article_id, published_at=published_at, category_id=category, **kw
    )


def make_click(user: str, article: str, ts: float, **kw) -> ClickEvent:
    return ClickEvent(user_id=user, article_id=article, ts=ts, **kw)


def make_session(articles: list[str], start: float = 0.0, user: str = "u0", gap: float = 60.0) -> Session:
    clicks = tuple(
        make_click(user, a, start + i * gap) for i, a in enumerate(articles)
    )
    return Session(session_id=f"{user}:{int(start)}", clicks=clicks, start_ts=clicks[0].ts)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_catalog() -> Catalog:
    articles = [
        make_article("a0", published_at=0.0, category=0, title="alpha news", body="Alpha body. More alpha."),
        make_article("a1", published_at=3600.0, category=1, title="beta news", body="Beta body. More beta."),
        make_article("a2", published_at=7200.0, category=0, title="gamma news", body="Gamma body here."),
        make_article("a3", published_at=10800.0, category=2, title="delta news", body="Delta body text."),
    ]
    return Catalog(articles)
