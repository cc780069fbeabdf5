"""Canonical event/article files: the portal-independent interchange format.

Both files are UTF-8 CSV with a header row. Events carry
`user_id,article_id,ts,device,os,referrer,city,region,country` (empty string
means absent); articles carry
`article_id,published_at,category_id,author_id,title,body`.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import DataError
from ..types import Article, Catalog, ClickEvent

log = logging.getLogger(__name__)

EVENT_FIELDS = (
    "user_id",
    "article_id",
    "ts",
    "device",
    "os",
    "referrer",
    "city",
    "region",
    "country",
)
ARTICLE_FIELDS = ("article_id", "published_at", "category_id", "author_id", "title", "body")

MALFORMED_ABORT_FRACTION = 0.01


@dataclass
class IngestStats:
    """Bookkeeping for the conservation invariant:
    emitted + dropped_unresolved = parsed event lines."""

    parsed: int = 0
    malformed: int = 0
    dropped_unresolved: int = 0
    emitted: int = 0
    malformed_examples: list[str] = field(default_factory=list)


def write_events(path: str | Path, events: Iterable[ClickEvent]) -> int:
    count = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_FIELDS)
        for e in events:
            writer.writerow(
                [
                    e.user_id,
                    e.article_id,
                    repr(float(e.ts)),
                    e.device,
                    e.os,
                    e.referrer,
                    e.city,
                    e.region,
                    e.country,
                ]
            )
            count += 1
    return count


def write_articles(path: str | Path, articles: Iterable[Article]) -> int:
    count = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ARTICLE_FIELDS)
        for a in articles:
            author = "" if a.author_id is None else str(a.author_id)
            writer.writerow(
                [a.article_id, repr(float(a.published_at)), str(a.category_id), author, a.title, a.body]
            )
            count += 1
    return count


def read_articles(path: str | Path) -> Catalog:
    path = Path(path)
    if not path.exists():
        raise DataError(f"articles file not found: {path}")
    catalog = Catalog()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(ARTICLE_FIELDS):
            raise DataError(f"{path}: bad article header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(ARTICLE_FIELDS):
                raise DataError(f"{path}:{lineno}: expected {len(ARTICLE_FIELDS)} fields")
            try:
                catalog.add(
                    Article(
                        article_id=row[0],
                        published_at=float(row[1]),
                        category_id=int(row[2]),
                        author_id=int(row[3]) if row[3] else None,
                        title=row[4],
                        body=row[5],
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return catalog


def load_canonical(
    events_path: str | Path, articles_path: str | Path
) -> tuple[list[ClickEvent], Catalog, IngestStats]:
    """Load the catalog, then the event stream in non-decreasing ts order.

    Events referencing unknown articles are dropped and counted. Malformed
    lines are skipped and counted; more than 1% malformed aborts with a
    report.
    """
    catalog = read_articles(articles_path)
    events_path = Path(events_path)
    if not events_path.exists():
        raise DataError(f"events file not found: {events_path}")

    stats = IngestStats()
    events: list[ClickEvent] = []
    with events_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(EVENT_FIELDS):
            raise DataError(f"{events_path}: bad event header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(EVENT_FIELDS):
                stats.malformed += 1
                if len(stats.malformed_examples) < 5:
                    stats.malformed_examples.append(f"line {lineno}: field count {len(row)}")
                continue
            try:
                event = ClickEvent(
                    user_id=row[0],
                    article_id=row[1],
                    ts=float(row[2]),
                    device=row[3],
                    os=row[4],
                    referrer=row[5],
                    city=row[6],
                    region=row[7],
                    country=row[8],
                )
            except ValueError:
                stats.malformed += 1
                if len(stats.malformed_examples) < 5:
                    stats.malformed_examples.append(f"line {lineno}: unparsable ts {row[2]!r}")
                continue
            stats.parsed += 1
            if event.article_id not in catalog:
                stats.dropped_unresolved += 1
                continue
            events.append(event)
            stats.emitted += 1

    total_lines = stats.parsed + stats.malformed
    if total_lines and stats.malformed / total_lines > MALFORMED_ABORT_FRACTION:
        examples = "; ".join(stats.malformed_examples)
        raise DataError(
            f"{events_path}: {stats.malformed}/{total_lines} malformed lines "
            f"(>{MALFORMED_ABORT_FRACTION:.0%}); examples: {examples}"
        )
    if any(a.ts > b.ts for a, b in zip(events, events[1:])):
        log.info("%s: events out of order, sorting by ts", events_path)
        events.sort(key=lambda e: (e.ts, e.user_id, e.article_id))
    return events, catalog, stats
