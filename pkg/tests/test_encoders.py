import numpy as np
import pytest

from newsrec.content import EmbeddingStore, encode_corpus
from newsrec.errors import ConfigError
from newsrec.ingest import generate_synthetic
from newsrec.types import Article, Catalog


def topic_catalog() -> Catalog:
    corpus = generate_synthetic(n_topics=2, n_articles=40, n_users=5, days=2, seed=3)
    return Catalog(corpus.articles)


def test_none_encoder_is_empty():
    store = encode_corpus("none", topic_catalog())
    assert len(store) == 0


def test_unknown_encoder_rejected():
    with pytest.raises(ConfigError):
        encode_corpus("bogus", topic_catalog())


def test_lsa_separates_topics():
    catalog = topic_catalog()
    store = encode_corpus("lsa", catalog, dim=16, seed=0)
    by_topic: dict[int, list[np.ndarray]] = {0: [], 1: []}
    for article in catalog:
        topic = int(article.article_id[1:]) % 2
        vec = store.get(article.article_id)
        assert vec is not None
        by_topic[topic].append(vec)
    within, cross = [], []
    for t, vecs in by_topic.items():
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                within.append(vecs[i] @ vecs[j])
    for v0 in by_topic[0]:
        for v1 in by_topic[1]:
            cross.append(v0 @ v1)
    assert np.mean(within) > np.mean(cross)


@pytest.mark.parametrize("encoder", ["lsa", "doc2vec"])
def test_all_embeddings_unit_norm(encoder):
    catalog = topic_catalog()
    kwargs = {"doc2vec_epochs": 3} if encoder == "doc2vec" else {}
    store = encode_corpus(encoder, catalog, dim=12, seed=1, **kwargs)
    assert len(store) > 0
    for article_id in store.ids():
        assert np.linalg.norm(store.get(article_id)) == pytest.approx(1.0, abs=1e-6)


def test_textless_articles_flagged_not_embedded():
    articles = [
        Article(article_id="a", published_at=0, category_id=0, title="words here", body="More words."),
        Article(article_id="b", published_at=0, category_id=0, title="other words", body="Still more."),
        Article(article_id="empty", published_at=0, category_id=0, title="", body=""),
    ]
    store = encode_corpus("lsa", Catalog(articles), dim=2, seed=0)
    assert "empty" in store.textless
    assert store.get("empty") is None


def test_store_roundtrip(tmp_path):
    store = EmbeddingStore(dim=3)
    store.add("a1", np.array([1.0, 0.0, 0.0]))
    store.add("a2", np.array([0.0, 0.6, 0.8]))
    store.flag_textless("a3")
    path = tmp_path / "emb.txt"
    store.save(path, {"encoder": "lsa", "dim": 3, "seed": 7})
    loaded, manifest = EmbeddingStore.load(path)
    assert manifest["encoder"] == "lsa"
    assert manifest["seed"] == "7"
    assert loaded.textless == {"a3"}
    np.testing.assert_array_equal(loaded.get("a2"), store.get("a2"))
