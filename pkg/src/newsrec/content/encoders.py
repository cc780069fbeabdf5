"""Encoder dispatch, the article-embedding store, and its on-disk format."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from ..types import Catalog
from .doc2vec import doc2vec_fit
from .lsa import lsa_encode_matrix, lsa_fit
from .text import prepare_text
from .tfidf import tfidf_fit, tfidf_matrix
from .wordvecs import WordEmbeddingTable, measure_coverage, w2v_tfidf_encode

ENCODERS = ("none", "lsa", "w2v_tfidf", "doc2vec")


class EmbeddingStore:
    """article_id -> unit-norm content vector, plus the textless id set."""

    def __init__(self, dim: int):
        self.dim = dim
        self._vecs: dict[str, np.ndarray] = {}
        self.textless: set[str] = set()

    def add(self, article_id: str, vec: np.ndarray) -> None:
        if vec.shape != (self.dim,):
            raise ValueError(f"embedding for {article_id}: expected dim {self.dim}")
        self._vecs[article_id] = np.asarray(vec, dtype=np.float64)

    def flag_textless(self, article_id: str) -> None:
        self.textless.add(article_id)

    def get(self, article_id: str) -> np.ndarray | None:
        return self._vecs.get(article_id)

    def __contains__(self, article_id: str) -> bool:
        return article_id in self._vecs

    def __len__(self) -> int:
        return len(self._vecs)

    def ids(self) -> list[str]:
        return list(self._vecs.keys())

    def save(self, path: str | Path, manifest: dict[str, object]) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            for article_id, vec in self._vecs.items():
                values = " ".join(f"{x:.17g}" for x in vec)
                fh.write(f"{article_id} {values}\n")
        lines = [f"{k}={manifest[k]}" for k in sorted(manifest)]
        lines.append(f"textless={','.join(sorted(self.textless))}")
        Path(f"{path}.manifest").write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> tuple["EmbeddingStore", dict[str, str]]:
        path = Path(path)
        manifest: dict[str, str] = {}
        manifest_path = Path(f"{path}.manifest")
        if manifest_path.exists():
            for line in manifest_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    key, _, value = line.partition("=")
                    manifest[key] = value
        store: EmbeddingStore | None = None
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                vec = np.array(parts[1:], dtype=np.float64)
                if store is None:
                    store = cls(dim=vec.size)
                elif vec.size != store.dim:
                    raise DataError(f"{path}:{lineno}: inconsistent dimension")
                store.add(parts[0], vec)
        if store is None:
            store = cls(dim=int(manifest.get("dim", 0)))
        for article_id in manifest.get("textless", "").split(","):
            if article_id:
                store.flag_textless(article_id)
        return store, manifest


def tokenized_corpus(catalog: Catalog) -> tuple[list[str], list[list[str]]]:
    """Article ids and their prepared token sequences, in catalog order."""
    ids, corpus = [], []
    for article in catalog:
        ids.append(article.article_id)
        corpus.append(prepare_text(article))
    return ids, corpus


def encode_corpus(
    encoder: str,
    catalog: Catalog,
    dim: int = 250,
    seed: int = 0,
    word_table: WordEmbeddingTable | None = None,
    doc2vec_epochs: int = 10,
    doc2vec_negatives: int = 5,
) -> EmbeddingStore:
    """Build one embedding per non-textless article; all vectors unit-norm.

    `none` emits an empty store (the content-agnostic configuration reads no
    embeddings at all).
    """
    if encoder not in ENCODERS:
        raise ConfigError(f"unknown encoder {encoder!r}; expected one of {ENCODERS}")
    if encoder == "none":
        return EmbeddingStore(dim=0)

    ids, corpus = tokenized_corpus(catalog)
    store_dim = word_table.dim if encoder == "w2v_tfidf" and word_table else dim
    store = EmbeddingStore(dim=store_dim)
    nonempty = [i for i, tokens in enumerate(corpus) if tokens]
    for i, tokens in enumerate(corpus):
        if not tokens:
            store.flag_textless(ids[i])
    if not nonempty:
        return store

    if encoder == "lsa":
        model = tfidf_fit([corpus[i] for i in nonempty])
        rows = tfidf_matrix(model, [corpus[i] for i in nonempty])
        lsa = lsa_fit(rows, k=dim, seed=seed)
        if lsa.k != dim:
            store.dim = lsa.k
        emb, ok = lsa_encode_matrix(lsa, rows)
        for row, i in enumerate(nonempty):
            if ok[row]:
                store.add(ids[i], emb[row])
            else:
                store.flag_textless(ids[i])
    elif encoder == "w2v_tfidf":
        if word_table is None:
            raise ConfigError("w2v_tfidf encoder needs a pretrained word-vector table")
        word_table.coverage = measure_coverage(word_table, [corpus[i] for i in nonempty])
        model = tfidf_fit([corpus[i] for i in nonempty])
        for i in nonempty:
            vec = w2v_tfidf_encode(word_table, model, corpus[i])
            if vec is None:
                store.flag_textless(ids[i])
            else:
                store.add(ids[i], vec)
    else:  # doc2vec
        model = doc2vec_fit(
            [corpus[i] for i in nonempty],
            dim=dim,
            epochs=doc2vec_epochs,
            negatives=doc2vec_negatives,
            seed=seed,
        )
        for row, i in enumerate(nonempty):
            vec = model.document_embedding(row)
            if np.linalg.norm(vec) < 0.5:  # zero vector: never trained
                store.flag_textless(ids[i])
            else:
                store.add(ids[i], vec)
    return store
