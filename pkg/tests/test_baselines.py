import math

import numpy as np
import pytest

from conftest import make_click, make_session
from newsrec.baselines import (
    ContentBased,
    CoOccurrence,
    ItemKnn,
    PairCoCounter,
    RecentlyPopular,
    SequentialRules,
    load_state,
    rank_candidates,
    save_state,
)
from newsrec.content import EmbeddingStore


def random_sessions(rng, n, n_articles=30, max_len=8):
    sessions = []
    for i in range(n):
        size = int(rng.integers(2, max_len + 1))
        ids = rng.permutation(n_articles)[:size]
        sessions.append(make_session([f"a{j}" for j in ids], start=float(i * 100), user=f"u{i}"))
    return sessions


class TestCoOccurrence:
    def test_spec_counts(self):
        co = CoOccurrence()
        for s in (["A", "B"], ["A", "B"], ["A", "C"]):
            co.observe_session(make_session(list(s)))
        scores = co.score((make_click("u", "A", 0),), ["B", "C", "D"])
        assert scores.tolist() == [2.0, 1.0, 0.0]

    def test_empty_state_scores_zero(self):
        co = CoOccurrence()
        scores = co.score((make_click("u", "A", 0),), ["B", "C"])
        assert scores.tolist() == [0.0, 0.0]

    def test_each_pair_counted_once_per_session(self):
        co = CoOccurrence()
        co.observe_session(make_session(["A", "B", "C"]))
        assert co.pairs.pair_count("A", "B") == 1
        assert co.pairs.pair_count("A", "C") == 1
        assert co.pairs.pair_count("B", "C") == 1
        assert co.pairs.pair_count("C", "A") == 1  # unordered

    def test_matches_brute_force(self, rng):
        sessions = random_sessions(rng, 300)
        co = CoOccurrence()
        for s in sessions:
            co.observe_session(s)
        # brute force: enumerate all unordered pairs from scratch
        expected: dict[frozenset, int] = {}
        for s in sessions:
            ids = s.article_ids
            for i in range(len(ids)):
                for j in range(i + 1, len(ids)):
                    key = frozenset((ids[i], ids[j]))
                    expected[key] = expected.get(key, 0) + 1
        for key, count in expected.items():
            a, b = tuple(key)
            assert co.pairs.pair_count(a, b) == count


class TestSequentialRules:
    def test_spec_weights(self):
        sr = SequentialRules()
        sr.observe_session(make_session(["A", "B", "C"]))
        assert sr.rules[("A", "B")] == pytest.approx(1.0)
        assert sr.rules[("A", "C")] == pytest.approx(0.5)
        assert sr.rules[("B", "C")] == pytest.approx(1.0)

    def test_additivity(self):
        sr = SequentialRules()
        sr.observe_session(make_session(["A", "B"]))
        sr.observe_session(make_session(["A", "B"]))
        assert sr.rules[("A", "B")] == pytest.approx(2.0)

    def test_no_outgoing_rules_scores_zero(self):
        sr = SequentialRules()
        sr.observe_session(make_session(["A", "B", "C"]))
        scores = sr.score((make_click("u", "C", 0),), ["A", "B"])
        assert scores.tolist() == [0.0, 0.0]

    def test_matches_brute_force(self, rng):
        sessions = random_sessions(rng, 300)
        sr = SequentialRules()
        for s in sessions:
            sr.observe_session(s)
        expected: dict[tuple, float] = {}
        for s in sessions:
            ids = s.article_ids
            for p in range(len(ids)):
                for q in range(p + 1, len(ids)):
                    key = (ids[p], ids[q])
                    expected[key] = expected.get(key, 0.0) + 1.0 / (q - p)
        assert set(sr.rules) == set(expected)
        for key in expected:
            assert sr.rules[key] == pytest.approx(expected[key], abs=1e-12)


class TestItemKnn:
    def test_spec_cosine(self):
        knn = ItemKnn(pairs=PairCoCounter())
        for s in (["A", "B"], ["A", "B"], ["B", "C"]):
            knn.observe_session(make_session(list(s)))
        # v_A = {B: 2}, v_C = {B: 1} -> cosine 1 on the shared B axis
        scores = knn.score((make_click("u", "A", 0),), ["C"])
        assert scores[0] == pytest.approx(1.0)

    def test_self_cosine_is_one(self):
        knn = ItemKnn(pairs=PairCoCounter())
        knn.observe_session(make_session(["A", "B", "C"]))
        assert knn.pairs.cosine("A", "A") == pytest.approx(1.0)

    def test_never_cooccurring_scores_zero(self):
        knn = ItemKnn(pairs=PairCoCounter())
        knn.observe_session(make_session(["A", "B"]))
        knn.observe_session(make_session(["C", "D"]))
        scores = knn.score((make_click("u", "A", 0),), ["C", "D"])
        assert scores.tolist() == [0.0, 0.0]

    def test_matches_brute_force_cosine(self, rng):
        sessions = random_sessions(rng, 200, n_articles=15)
        knn = ItemKnn(pairs=PairCoCounter())
        for s in sessions:
            knn.observe_session(s)
        counts: dict[tuple, int] = {}
        items = set()
        for s in sessions:
            ids = s.article_ids
            items.update(ids)
            for i in range(len(ids)):
                for j in range(len(ids)):
                    if i != j:
                        counts[(ids[i], ids[j])] = counts.get((ids[i], ids[j]), 0) + (1 if i < j else 0)
        # symmetric counts
        def vec(a):
            return {b: counts.get((a, b), 0) + counts.get((b, a), 0) for b in items if b != a}

        items = sorted(items)
        for a in items[:8]:
            va = vec(a)
            na = math.sqrt(sum(v * v for v in va.values()))
            for c in items[:8]:
                vc = vec(c)
                nc = math.sqrt(sum(v * v for v in vc.values()))
                dot = sum(va[k] * vc.get(k, 0) for k in va)
                expected = dot / (na * nc) if na and nc and dot else 0.0
                got = knn.pairs.cosine(a, c)
                assert got == pytest.approx(expected, abs=1e-9)

    def test_norm_cache_consistent(self, rng):
        knn = ItemKnn(pairs=PairCoCounter())
        for s in random_sessions(rng, 100, n_articles=10):
            knn.observe_session(s)
        for a, row in knn.pairs.neighbours.items():
            direct = math.sqrt(sum(v * v for v in row.values()))
            assert knn.pairs.norm(a) == pytest.approx(direct, abs=1e-9)


class TestRecentlyPopular:
    def test_ordering_by_window_count(self):
        rp = RecentlyPopular()
        t = 1000.0
        for _ in range(5):
            rp.observe(make_click("u", "X", t))
        for _ in range(3):
            rp.observe(make_click("u", "Y", t))
        scores = rp.score((), ["X", "Y"], now=t + 10)
        assert scores[0] > scores[1]

    def test_click_outside_window_not_counted(self):
        rp = RecentlyPopular()
        rp.observe(make_click("u", "X", 0.0))
        assert rp.score((), ["X"], now=61 * 60.0)[0] == 0.0
        assert rp.score((), ["X"], now=59 * 60.0)[0] == 1.0

    def test_matches_full_rescan_oracle(self, rng):
        rp = RecentlyPopular()
        clicks = []
        t = 0.0
        for _ in range(2000):
            t += float(rng.exponential(30.0))
            article = f"a{rng.integers(40)}"
            clicks.append((t, article))
            rp.observe(make_click("u", article, t))
            if rng.random() < 0.05:
                now = t + float(rng.uniform(0, 600))
                candidates = [f"a{j}" for j in range(40)]
                got = rp.score((), candidates, now=now)
                expected = [
                    sum(1 for ts, a in clicks if a == c and now - ts < 3600.0)
                    for c in candidates
                ]
                assert got.tolist() == [float(e) for e in expected]

    def test_window_conservation(self, rng):
        rp = RecentlyPopular()
        clicks = []
        t = 0.0
        for _ in range(500):
            t += float(rng.exponential(40.0))
            clicks.append((t, f"a{rng.integers(10)}"))
            rp.observe(make_click("u", clicks[-1][1], t))
        counts = rp.window_counts(now=t)
        assert sum(counts.values()) == sum(1 for ts, _ in clicks if t - ts < 3600.0)

    def test_score_does_not_mutate_state(self):
        rp = RecentlyPopular()
        for i in range(10):
            rp.observe(make_click("u", f"a{i}", float(i)))
        before = rp.state_digest()
        rp.score((), ["a0", "a5"], now=7200.0)
        assert rp.state_digest() == before


class TestContentBased:
    def make_store(self):
        store = EmbeddingStore(dim=2)
        store.add("last", np.array([1.0, 0.0]))
        store.add("same", np.array([1.0, 0.0]))
        store.add("orth", np.array([0.0, 1.0]))
        store.flag_textless("none")
        return store

    def test_identical_embedding_ranks_first(self):
        cb = ContentBased(self.make_store())
        prefix = (make_click("u", "last", 0),)
        scores = cb.score(prefix, ["same", "orth"])
        assert scores[0] == pytest.approx(1.0)
        assert scores[1] == pytest.approx(0.0)
        ranking = rank_candidates(["same", "orth"], scores)
        assert ranking[0] == "same"

    def test_textless_candidate_ranked_last(self):
        cb = ContentBased(self.make_store())
        prefix = (make_click("u", "last", 0),)
        scores = cb.score(prefix, ["none", "orth"])
        assert scores[0] == -np.inf
        assert rank_candidates(["none", "orth"], scores)[-1] == "none"

    def test_textless_last_item_scores_zero(self):
        cb = ContentBased(self.make_store())
        prefix = (make_click("u", "none", 0),)
        assert cb.score(prefix, ["same", "orth"]).tolist() == [0.0, 0.0]

    def test_ranking_matches_dot_product_sort(self, rng):
        store = EmbeddingStore(dim=5)
        vecs = rng.standard_normal((10, 5))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        for i in range(10):
            store.add(f"a{i}", vecs[i])
        cb = ContentBased(store)
        prefix = (make_click("u", "a0", 0),)
        candidates = [f"a{i}" for i in range(1, 10)]
        scores = cb.score(prefix, candidates)
        expected = sorted(candidates, key=lambda c: -(vecs[0] @ vecs[int(c[1:])]))
        assert rank_candidates(candidates, scores) == expected


class TestIncrementalEqualsBatch:
    def test_streaming_equals_rebuild(self, rng):
        sessions = random_sessions(rng, 500, n_articles=25)
        streamed = {
            "co": CoOccurrence(),
            "sr": SequentialRules(),
            "knn": ItemKnn(pairs=PairCoCounter()),
            "rp": RecentlyPopular(),
        }
        for s in sessions:
            for rec in streamed.values():
                rec.observe_session(s)
        rebuilt = {
            "co": CoOccurrence(),
            "sr": SequentialRules(),
            "knn": ItemKnn(pairs=PairCoCounter()),
            "rp": RecentlyPopular(),
        }
        for s in sessions:
            for rec in rebuilt.values():
                rec.observe_session(s)
        for name in streamed:
            assert streamed[name].state_digest() == rebuilt[name].state_digest()


class TestTieBreaking:
    def test_tiebreak_order(self):
        scores = np.array([1.0, 1.0, 1.0, 2.0])
        ranking = rank_candidates(["d", "b", "a", "z"], scores, {"b": 5, "a": 5, "d": 9})
        # score first (z), then popularity (d=9 over a/b=5), then id asc (a before b)
        assert ranking == ["z", "d", "a", "b"]

    def test_deterministic(self, rng):
        ids = [f"a{i}" for i in range(20)]
        scores = rng.standard_normal(20)
        pops = {f"a{i}": int(rng.integers(5)) for i in range(20)}
        assert rank_candidates(ids, scores, pops) == rank_candidates(ids, scores, pops)


class TestSnapshots:
    def test_roundtrip_all_kinds(self, tmp_path, rng):
        sessions = random_sessions(rng, 50)
        co = CoOccurrence()
        sr = SequentialRules()
        knn = ItemKnn(pairs=PairCoCounter())
        rp = RecentlyPopular()
        for s in sessions:
            for rec in (co, sr, knn, rp):
                rec.observe_session(s)
        for rec in (co, sr, knn, rp):
            path = tmp_path / f"{rec.name}.state"
            save_state(rec, path)
            loaded = load_state(path)
            assert loaded.state_digest() == rec.state_digest()
            assert loaded.name == rec.name

    def test_knn_norms_survive_roundtrip(self, tmp_path, rng):
        knn = ItemKnn(pairs=PairCoCounter())
        for s in random_sessions(rng, 80, n_articles=12):
            knn.observe_session(s)
        save_state(knn, tmp_path / "knn.state")
        loaded = load_state(tmp_path / "knn.state")
        for a in knn.pairs.neighbours:
            assert loaded.pairs.norm(a) == pytest.approx(knn.pairs.norm(a), abs=1e-9)
