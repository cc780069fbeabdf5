import numpy as np
import pytest

from conftest import make_click
from newsrec.errors import DataError
from newsrec.ingest import (
    build_sessions,
    load_canonical,
    preprocess_session,
    sessionize,
    write_articles,
    write_events,
)
from newsrec.ingest.sessions import RawSession
from newsrec.types import Article, ClickEvent

MIN = 60.0


def write_corpus(tmp_path, events, articles):
    ev = tmp_path / "events.csv"
    ar = tmp_path / "articles.csv"
    write_events(ev, events)
    write_articles(ar, articles)
    return ev, ar


def two_articles():
    return [
        Article(article_id="a1", published_at=0.0, category_id=0),
        Article(article_id="a2", published_at=0.0, category_id=1),
    ]


class TestLoadCanonical:
    def test_well_formed_passthrough(self, tmp_path):
        events = [
            make_click("u1", "a1", 10.0),
            make_click("u1", "a2", 20.0),
            make_click("u2", "a1", 30.0),
        ]
        ev, ar = write_corpus(tmp_path, events, two_articles())
        out, catalog, stats = load_canonical(ev, ar)
        assert [e.ts for e in out] == [10.0, 20.0, 30.0]
        assert stats.emitted == 3 and stats.malformed == 0
        assert len(catalog) == 2

    def test_unknown_article_dropped_and_counted(self, tmp_path):
        events = [make_click("u1", "a1", 10.0), make_click("u1", "ghost", 20.0)]
        ev, ar = write_corpus(tmp_path, events, two_articles())
        out, _, stats = load_canonical(ev, ar)
        assert len(out) == 1
        assert stats.dropped_unresolved == 1
        assert stats.emitted + stats.dropped_unresolved == stats.parsed

    def test_out_of_order_input_sorted(self, tmp_path, rng):
        ts = rng.uniform(0, 1e6, size=200)
        events = [make_click(f"u{i%7}", "a1", float(t)) for i, t in enumerate(ts)]
        ev, ar = write_corpus(tmp_path, events, two_articles())
        out, _, _ = load_canonical(ev, ar)
        expected = sorted(e.ts for e in events)  # independent sort oracle
        assert [e.ts for e in out] == expected

    def test_malformed_lines_skipped(self, tmp_path):
        events = [make_click("u1", "a1", float(i)) for i in range(200)]
        ev, ar = write_corpus(tmp_path, events, two_articles())
        with ev.open("a", encoding="utf-8") as fh:
            fh.write("u9,a1,NOT_A_TS,,,,,,\n")
        out, _, stats = load_canonical(ev, ar)
        assert stats.malformed == 1
        assert len(out) == 200

    def test_too_many_malformed_aborts(self, tmp_path):
        events = [make_click("u1", "a1", float(i)) for i in range(10)]
        ev, ar = write_corpus(tmp_path, events, two_articles())
        with ev.open("a", encoding="utf-8") as fh:
            fh.write("u9,a1,BAD,,,,,,\n")  # 1 of 11 lines > 1%
        with pytest.raises(DataError):
            load_canonical(ev, ar)

    def test_missing_files_error(self, tmp_path):
        ev, ar = write_corpus(tmp_path, [], two_articles())
        with pytest.raises(DataError):
            load_canonical(tmp_path / "nope.csv", ar)
        with pytest.raises(DataError):
            load_canonical(ev, tmp_path / "nope.csv")

    def test_body_with_commas_roundtrips(self, tmp_path):
        articles = [
            Article(
                article_id="a1",
                published_at=5.0,
                category_id=3,
                author_id=7,
                title='Breaking, "news"',
                body="First, second. Third, fourth.\nNew line.",
            )
        ]
        ev, ar = write_corpus(tmp_path, [make_click("u", "a1", 1.0)], articles)
        _, catalog, _ = load_canonical(ev, ar)
        assert catalog["a1"].body == articles[0].body
        assert catalog["a1"].title == articles[0].title
        assert catalog["a1"].author_id == 7


class TestSessionize:
    def test_gap_splits(self):
        events = [
            make_click("u", "a", 0.0),
            make_click("u", "b", 10 * MIN),
            make_click("u", "c", 50 * MIN),
        ]
        sessions = sessionize(events)
        assert [[c.article_id for c in s.clicks] for s in sessions] == [["a", "b"], ["c"]]

    def test_sub_threshold_gap_keeps_one_session(self):
        events = [make_click("u", "a", 0.0), make_click("u", "b", 29 * MIN)]
        assert len(sessionize(events)) == 1

    def test_exact_threshold_starts_new_session(self):
        events = [make_click("u", "a", 0.0), make_click("u", "b", 30 * MIN)]
        assert len(sessionize(events)) == 2

    def test_matches_linear_scan_oracle(self, rng):
        gaps = rng.exponential(15 * MIN, size=1000)
        users = rng.integers(0, 20, size=1000)
        clock = {u: float(rng.uniform(0, 1000)) for u in range(20)}
        events = []
        for u, g in zip(users, gaps):
            clock[u] += g
            events.append(make_click(f"u{u}", f"a{rng.integers(50)}", clock[u]))
        events.sort(key=lambda e: e.ts)

        # independent oracle: per-user linear scan
        per_user: dict[str, list[ClickEvent]] = {}
        for e in events:
            per_user.setdefault(e.user_id, []).append(e)
        expected = []
        for user in per_user:
            run = [per_user[user][0]]
            for e in per_user[user][1:]:
                if e.ts - run[-1].ts < 30 * MIN:
                    run.append(e)
                else:
                    expected.append((user, tuple(run)))
                    run = [e]
            expected.append((user, tuple(run)))
        expected.sort(key=lambda s: (s[1][0].ts, s[0]))

        got = sessionize(events)
        assert [(s.user_id, s.clicks) for s in got] == expected

    def test_sessions_sorted_by_first_click(self, rng):
        events = sorted(
            (make_click(f"u{rng.integers(5)}", "a", float(t)) for t in rng.uniform(0, 1e5, 300)),
            key=lambda e: e.ts,
        )
        sessions = sessionize(events)
        starts = [s.start_ts for s in sessions]
        assert starts == sorted(starts)


class TestPreprocess:
    def test_dedup_keeps_first(self):
        raw = RawSession("u", (make_click("u", "A", 0), make_click("u", "A", 60), make_click("u", "B", 120)))
        session = preprocess_session(raw)
        assert session.article_ids == ("A", "B")
        assert session.clicks[0].ts == 0

    def test_truncates_to_twenty(self):
        raw = RawSession("u", tuple(make_click("u", f"a{i}", i * 10.0) for i in range(25)))
        session = preprocess_session(raw)
        assert len(session) == 20
        assert session.article_ids == tuple(f"a{i}" for i in range(20))

    def test_single_article_discarded(self):
        raw = RawSession("u", (make_click("u", "A", 0), make_click("u", "A", 60)))
        assert preprocess_session(raw) is None

    def test_dedup_applies_before_truncation(self):
        # 21 clicks with one duplicate: dedup -> 20 distinct, nothing lost to the cap
        ids = [f"a{i}" for i in range(20)] + ["a0"]
        raw = RawSession("u", tuple(make_click("u", a, i * 10.0) for i, a in enumerate(ids)))
        session = preprocess_session(raw)
        assert len(session) == 20


class TestPipelineProperties:
    def test_emitted_sessions_satisfy_invariants(self, rng):
        events = []
        for u in range(30):
            t = float(rng.uniform(0, 3600))
            for _ in range(int(rng.integers(1, 40))):
                t += float(rng.exponential(8 * MIN))
                events.append(make_click(f"u{u}", f"a{rng.integers(12)}", t))
        events.sort(key=lambda e: e.ts)
        for session in build_sessions(events):
            session.validate()

    def test_resessionizing_is_idempotent(self, rng):
        events = []
        for u in range(20):
            t = float(rng.uniform(0, 3600))
            for _ in range(int(rng.integers(2, 30))):
                t += float(rng.exponential(10 * MIN))
                events.append(make_click(f"u{u}", f"a{rng.integers(100)}", t))
        events.sort(key=lambda e: e.ts)
        first = sessionize(events)
        again = sessionize([c for s in first for c in s.clicks])
        assert [(s.user_id, s.clicks) for s in again] == [(s.user_id, s.clicks) for s in first]

    def test_click_conservation(self, rng):
        events = [
            make_click(f"u{rng.integers(10)}", f"a{rng.integers(20)}", float(t))
            for t in sorted(rng.uniform(0, 1e5, size=500))
        ]
        sessions = sessionize(events)
        assert sum(len(s.clicks) for s in sessions) == len(events)
