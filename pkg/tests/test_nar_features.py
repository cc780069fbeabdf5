import numpy as np
import pytest

from conftest import make_click
from newsrec.content import EmbeddingStore
from newsrec.nar.features import FeatureSpec, Featurizer, RunningStats, day_of_week, hour_of_day
from newsrec.popularity import PopularityEstimator
from newsrec.types import Article, Catalog

CONTEXT = {"device": ["desktop", "mobile"], "os": ["android"], "referrer": ["direct", "search"]}


def build(catalog=None, use_ace=True, d_ace=3, **spec_kw):
    if catalog is None:
        catalog = Catalog(
            [
                Article(article_id="a0", published_at=0.0, category_id=7),
                Article(article_id="a1", published_at=3600.0, category_id=9),
            ]
        )
    store = EmbeddingStore(dim=d_ace)
    store.add("a0", np.array([1.0, 0.0, 0.0])[:d_ace])
    pop = PopularityEstimator()
    spec = FeatureSpec(use_ace=use_ace, d_ace=d_ace if use_ace else 0, **spec_kw)
    return Featurizer(spec, catalog, store if use_ace else None, pop, CONTEXT, seed=0), pop


class TestDimensions:
    def test_no_ace_is_smaller_by_ace_plus_presence(self):
        with_ace = FeatureSpec(use_ace=True, d_ace=250)
        without = FeatureSpec(use_ace=False, d_ace=0)
        assert with_ace.d_input - without.d_input == 251
        assert with_ace.d_candidate - without.d_candidate == 251

    def test_matrix_shapes(self):
        fz, _ = build()
        x, _ = fz.input_matrix([make_click("u", "a0", 100.0, device="mobile")])
        assert x.shape == (1, fz.spec.d_input)
        c, _ = fz.candidate_matrix(["a0", "a1"], now=100.0)
        assert c.shape == (2, fz.spec.d_candidate)

    def test_no_ace_never_reads_embeddings(self):
        fz, _ = build(use_ace=False)
        assert fz.embeddings is None
        x, _ = fz.input_matrix([make_click("u", "a0", 100.0)])
        assert x.shape == (1, fz.spec.d_input)


class TestAssembly:
    def test_fresh_article_has_zero_raw_recency(self):
        fz, _ = build()
        # published_at == click ts -> ln(1 + 0) = 0; stats empty so raw passes through
        x, _ = fz.input_matrix([make_click("u", "a0", 0.0)])
        recency_col = fz.spec.d_candidate - 1
        assert x[0, recency_col] == 0.0

    def test_hour_six_encodes_to_sin_one_cos_zero(self):
        fz, _ = build()
        ts = 6 * 3600.0
        assert hour_of_day(ts) == 6
        x, _ = fz.input_matrix([make_click("u", "a0", ts)])
        sin_col = fz.spec.d_input - 2
        assert x[0, sin_col] == pytest.approx(1.0, abs=1e-12)
        assert x[0, sin_col + 1] == pytest.approx(0.0, abs=1e-12)

    def test_hand_assembled_concatenation(self):
        fz, pop = build()
        click = make_click("u", "a0", 7200.0, device="mobile", os="android", referrer="search")
        x, _ = fz.input_matrix([click])
        spec = fz.spec
        col = 0
        np.testing.assert_array_equal(x[0, col : col + 3], [1.0, 0.0, 0.0])  # ACE
        col += 3
        assert x[0, col] == 1.0  # presence bit
        col += 1
        cat_row = fz._category_index[7]
        np.testing.assert_array_equal(
            x[0, col : col + spec.category_dim], fz.tables["emb_category"][cat_row]
        )
        col += spec.category_dim
        assert x[0, col] == pop.self_information("a0")  # novelty (raw: stats empty)
        col += 1
        assert x[0, col] == pytest.approx(np.log1p(2.0))  # 2 hours old
        col += 1
        dev_row = fz._context_index["device"]["mobile"]
        np.testing.assert_array_equal(
            x[0, col : col + spec.context_dim], fz.tables["emb_device"][dev_row]
        )
        col += spec.context_dim
        os_row = fz._context_index["os"]["android"]
        np.testing.assert_array_equal(
            x[0, col : col + spec.context_dim], fz.tables["emb_os"][os_row]
        )
        col += spec.context_dim
        ref_row = fz._context_index["referrer"]["search"]
        np.testing.assert_array_equal(
            x[0, col : col + spec.context_dim], fz.tables["emb_referrer"][ref_row]
        )
        col += spec.context_dim
        np.testing.assert_array_equal(
            x[0, col : col + spec.context_dim], fz.tables["emb_dow"][day_of_week(7200.0)]
        )
        col += spec.context_dim
        assert x[0, col] == pytest.approx(np.sin(2 * np.pi * 2 / 24))
        assert x[0, col + 1] == pytest.approx(np.cos(2 * np.pi * 2 / 24))
        assert col + 2 == spec.d_input

    def test_missing_ace_zeroes_slot_and_presence(self):
        fz, _ = build()  # a1 has no embedding
        x, _ = fz.input_matrix([make_click("u", "a1", 3600.0)])
        np.testing.assert_array_equal(x[0, :3], 0.0)
        assert x[0, 3] == 0.0

    def test_unknown_context_value_maps_to_row_zero(self):
        fz, _ = build()
        x, _ = fz.input_matrix([make_click("u", "a0", 0.0, device="smartwatch")])
        col = fz.spec.d_candidate
        np.testing.assert_array_equal(
            x[0, col : col + fz.spec.context_dim], fz.tables["emb_device"][0]
        )


class TestRunningStats:
    def test_welford_matches_numpy(self, rng):
        stats = RunningStats()
        values = rng.standard_normal(500) * 3 + 1
        for chunk in np.array_split(values, 7):
            stats.update(chunk)
        assert stats.mean == pytest.approx(values.mean(), abs=1e-10)
        var = stats.m2 / (stats.count - 1)
        assert var == pytest.approx(values.var(ddof=1), abs=1e-10)

    def test_stats_update_only_in_training_mode(self):
        fz, _ = build()
        click = make_click("u", "a0", 3600.0)
        fz.input_matrix([click], train=False)
        fz.candidate_matrix(["a0"], now=7200.0, train=False)
        assert fz.novelty_stats.count == 0 and fz.recency_stats.count == 0
        fz.input_matrix([click], train=True)
        assert fz.novelty_stats.count == 1 and fz.recency_stats.count == 1

    def test_standardization_applied_once_stats_exist(self):
        fz, _ = build()
        clicks = [make_click("u", "a0", t * 3600.0) for t in range(1, 6)]
        fz.input_matrix(clicks, train=True)
        x, _ = fz.input_matrix([make_click("u", "a0", 3 * 3600.0)], train=False)
        recency_col = fz.spec.d_candidate - 1
        raw = np.log1p(3.0)
        expected = fz.recency_stats.standardize(np.array([raw]))[0]
        assert x[0, recency_col] == pytest.approx(expected)
        assert x[0, recency_col] != pytest.approx(raw)  # stats now active


class TestEmbeddingGradients:
    def test_scatter_matches_finite_differences(self, rng):
        """End-to-end: loss gradient w.r.t. an embedding-table row equals
        central differences through assembly + network."""
        from newsrec.nar.model import NarCore, sampled_softmax_loss

        fz, _ = build(category_dim=2, context_dim=2)
        spec = fz.spec
        core = NarCore(spec.d_input, spec.d_candidate, hidden=3, scorer_hidden=4, seed=5)
        clicks = [
            make_click("u", "a0", 3600.0, device="mobile", referrer="direct"),
            make_click("u", "a1", 3900.0, device="mobile", referrer="search"),
        ]
        cand_ids = ["a1", "a0"]

        def compute_loss_and_table_grads():
            x_flat, meta_in = fz.input_matrix(clicks, train=False)
            x = x_flat[:, None, :]
            cand_flat, meta_c = fz.candidate_matrix(cand_ids, now=3900.0, train=False)
            cand = cand_flat[None, :, :]
            pos_t, pos_b = np.array([0]), np.array([0])
            loss, _, dx, dcand = core.loss_and_grads(x, pos_t, pos_b, cand)
            table_grads = fz.zero_table_grads()
            fz.scatter_grads(dx[:, 0, :], meta_in, table_grads)
            fz.scatter_grads(dcand[0], meta_c, table_grads)
            return loss, table_grads

        loss, grads = compute_loss_and_table_grads()
        eps = 1e-5
        for table_name in ("emb_category", "emb_device", "emb_dow"):
            table = fz.tables[table_name]
            it = np.nditer(table, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = table[idx]
                table[idx] = orig + eps
                up, _ = compute_loss_and_table_grads()
                table[idx] = orig - eps
                down, _ = compute_loss_and_table_grads()
                table[idx] = orig
                numeric = (up - down) / (2 * eps)
                assert abs(grads[table_name][idx] - numeric) <= 1e-6 * max(1.0, abs(numeric))
