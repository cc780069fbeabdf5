"""Portal adapters: pure column/field maps onto the canonical schema.

An adapter config is a plain-text key=value file mapping canonical fields to
source columns (CSV, for G1-style dumps) or JSON fields (Adressa-style
NDJSON logs). Keys prefixed `article.` map the article-metadata source;
`ts_unit` / `article.ts_unit` select seconds or milliseconds.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ..errors import DataError
from ..types import Article, ClickEvent
from .canonical import write_articles, write_events
from .sessions import build_sessions

log = logging.getLogger(__name__)

EVENT_CONTEXT_FIELDS = ("device", "os", "referrer", "city", "region", "country")


def parse_field_map(path: str | Path) -> dict[str, str]:
    """Read a key=value mapping file; blank lines and # comments ignored."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"adapter map not found: {path}")
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        mapping[key.strip()] = value.strip()
    return mapping


@dataclass
class AdapterSummary:
    """Post-preprocessing corpus statistics (the dataset-table numbers)."""

    users: int
    sessions: int
    clicks: int
    articles: int
    dropped_events: int = 0

    def format_table(self) -> str:
        lines = [
            f"# users    {self.users:>12,}",
            f"# sessions {self.sessions:>12,}",
            f"# clicks   {self.clicks:>12,}",
            f"# articles {self.articles:>12,}",
        ]
        if self.clicks and self.sessions:
            lines.append(f"avg session length {self.clicks / self.sessions:>8.2f}")
        return "\n".join(lines)


def summarize(events: list[ClickEvent], n_articles: int, dropped: int = 0) -> AdapterSummary:
    sessions = build_sessions(sorted(events, key=lambda e: e.ts))
    users = {s.clicks[0].user_id for s in sessions}
    clicks = sum(len(s) for s in sessions)
    return AdapterSummary(
        users=len(users),
        sessions=len(sessions),
        clicks=clicks,
        articles=n_articles,
        dropped_events=dropped,
    )


def _ts_scale(unit: str) -> float:
    if unit in ("", "s"):
        return 1.0
    if unit == "ms":
        return 1e-3
    raise DataError(f"unknown ts unit {unit!r} (expected 's' or 'ms')")


def _required(mapping: dict[str, str], key: str, where: str) -> str:
    if key not in mapping:
        raise DataError(f"{where}: adapter map is missing required key {key!r}")
    return mapping[key]


def _row_value(row: dict[str, str], column: str, where: str) -> str:
    if column not in row:
        raise DataError(f"{where}: source column {column!r} not present")
    return row[column] or ""


def _articles_from_csv(metadata_path: Path, column_map: dict[str, str]) -> list[Article]:
    id_col = _required(column_map, "article.article_id", str(metadata_path))
    pub_col = _required(column_map, "article.published_at", str(metadata_path))
    cat_col = _required(column_map, "article.category_id", str(metadata_path))
    author_col = column_map.get("article.author_id", "")
    title_col = column_map.get("article.title", "")
    body_col = column_map.get("article.body", "")
    scale = _ts_scale(column_map.get("article.ts_unit", column_map.get("ts_unit", "s")))

    articles: list[Article] = []
    seen: set[str] = set()
    with metadata_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            article_id = _row_value(row, id_col, str(metadata_path))
            if not article_id or article_id in seen:
                continue
            seen.add(article_id)
            articles.append(
                Article(
                    article_id=article_id,
                    published_at=float(_row_value(row, pub_col, str(metadata_path)) or 0) * scale,
                    category_id=int(float(_row_value(row, cat_col, str(metadata_path)) or 0)),
                    author_id=(
                        int(float(row[author_col])) if author_col and row.get(author_col) else None
                    ),
                    title=row.get(title_col, "") if title_col else "",
                    body=row.get(body_col, "") if body_col else "",
                )
            )
    return articles


def load_g1(
    clicks_dir: str | Path,
    metadata_path: str | Path,
    column_map: dict[str, str],
    out_events: str | Path,
    out_articles: str | Path,
) -> AdapterSummary:
    """Convert a G1-style dump (hourly click CSVs + one metadata CSV) to
    canonical files and report post-preprocessing statistics."""
    clicks_dir = Path(clicks_dir)
    metadata_path = Path(metadata_path)
    if not clicks_dir.is_dir():
        raise DataError(f"clicks directory not found: {clicks_dir}")
    if not metadata_path.exists():
        raise DataError(f"metadata file not found: {metadata_path}")

    articles = _articles_from_csv(metadata_path, column_map)
    known = {a.article_id for a in articles}

    user_col = _required(column_map, "user_id", "clicks")
    article_col = _required(column_map, "article_id", "clicks")
    ts_col = _required(column_map, "ts", "clicks")
    scale = _ts_scale(column_map.get("ts_unit", "s"))
    context_cols = {f: column_map.get(f, "") for f in EVENT_CONTEXT_FIELDS}

    events: list[ClickEvent] = []
    dropped = 0
    for csv_path in sorted(clicks_dir.glob("*.csv")):
        with csv_path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                article_id = _row_value(row, article_col, str(csv_path))
                if article_id not in known:
                    dropped += 1
                    continue
                context = {
                    f: (row.get(col, "") or "") if col else ""
                    for f, col in context_cols.items()
                }
                events.append(
                    ClickEvent(
                        user_id=_row_value(row, user_col, str(csv_path)),
                        article_id=article_id,
                        ts=float(_row_value(row, ts_col, str(csv_path))) * scale,
                        **context,
                    )
                )
    events.sort(key=lambda e: (e.ts, e.user_id, e.article_id))
    write_events(out_events, events)
    write_articles(out_articles, articles)
    summary = summarize(events, len(articles), dropped)
    log.info("g1 adapter: %s (dropped %d unresolvable events)", summary, dropped)
    return summary


def load_adressa(
    log_dir: str | Path,
    field_map: dict[str, str],
    out_events: str | Path,
    out_articles: str | Path,
) -> AdapterSummary:
    """Convert Adressa-style NDJSON logs to canonical files.

    Article metadata comes from `articles_path` (NDJSON, `article.*` keys) if
    mapped, otherwise from per-event fields named by `article.*` keys (first
    occurrence wins). Records without an article reference are dropped and
    counted.
    """
    log_dir = Path(log_dir)
    if not log_dir.is_dir():
        raise DataError(f"log directory not found: {log_dir}")
    user_field = _required(field_map, "user_id", str(log_dir))
    article_field = _required(field_map, "article_id", str(log_dir))
    ts_field = _required(field_map, "ts", str(log_dir))
    scale = _ts_scale(field_map.get("ts_unit", "s"))
    context_fields = {f: field_map.get(f, "") for f in EVENT_CONTEXT_FIELDS}

    articles: dict[str, Article] = {}
    if field_map.get("articles_path"):
        art_path = Path(field_map["articles_path"])
        if not art_path.exists():
            raise DataError(f"articles file not found: {art_path}")
        id_f = _required(field_map, "article.article_id", str(art_path))
        pub_f = _required(field_map, "article.published_at", str(art_path))
        cat_f = _required(field_map, "article.category_id", str(art_path))
        art_scale = _ts_scale(field_map.get("article.ts_unit", "s"))
        with art_path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                article_id = str(record.get(id_f, ""))
                if not article_id or article_id in articles:
                    continue
                author = record.get(field_map.get("article.author_id", ""), None)
                articles[article_id] = Article(
                    article_id=article_id,
                    published_at=float(record.get(pub_f, 0)) * art_scale,
                    category_id=int(record.get(cat_f, 0)),
                    author_id=int(author) if author is not None else None,
                    title=str(record.get(field_map.get("article.title", ""), "")),
                    body=str(record.get(field_map.get("article.body", ""), "")),
                )

    inline_pub = field_map.get("article.published_at", "")
    inline_title = field_map.get("article.title", "")
    inline_cat = field_map.get("article.category_id", "")
    synthesize = not field_map.get("articles_path")

    events: list[ClickEvent] = []
    dropped = 0
    for log_path in sorted(log_dir.glob("*")):
        if not log_path.is_file():
            continue
        with log_path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                article_id = record.get(article_field)
                if not article_id:
                    dropped += 1
                    continue
                article_id = str(article_id)
                ts = float(record.get(ts_field, 0)) * scale
                if synthesize and article_id not in articles:
                    articles[article_id] = Article(
                        article_id=article_id,
                        published_at=float(record.get(inline_pub, ts)) * scale
                        if inline_pub and record.get(inline_pub) is not None
                        else ts,
                        category_id=int(record.get(inline_cat, 0) or 0) if inline_cat else 0,
                        title=str(record.get(inline_title, "") or "") if inline_title else "",
                    )
                if article_id not in articles:
                    dropped += 1
                    continue
                context = {
                    f: str(record.get(field, "") or "") if field else ""
                    for f, field in context_fields.items()
                }
                events.append(
                    ClickEvent(
                        user_id=str(record.get(user_field, "")),
                        article_id=article_id,
                        ts=ts,
                        **context,
                    )
                )
    events.sort(key=lambda e: (e.ts, e.user_id, e.article_id))
    write_events(out_events, events)
    write_articles(out_articles, list(articles.values()))
    summary = summarize(events, len(articles), dropped)
    log.info("adressa adapter: %s (dropped %d events)", summary, dropped)
    return summary
