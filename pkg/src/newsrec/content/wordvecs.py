"""Pretrained word-embedding tables and tf*idf-weighted averaging."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError
from .tfidf import TfidfModel, tfidf_transform


@dataclass
class WordEmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int
    coverage: float = field(default=float("nan"))  # fraction of corpus tokens found

    def __contains__(self, token: str) -> bool:
        return token in self.vectors


def load_word_vectors(path: str | Path) -> WordEmbeddingTable:
    """Read the standard text format: a `count dim` header line, then one
    `token v1 ... v_dim` line per word."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: expected 'count dim' header line")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"{path}: non-integer header {header!r}") from exc
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise DataError(f"{path}:{lineno}: expected {dim} values")
            vectors[parts[0]] = np.array(parts[1:], dtype=np.float64)
    if len(vectors) != count:
        raise DataError(f"{path}: header claims {count} vectors, found {len(vectors)}")
    return WordEmbeddingTable(vectors=vectors, dim=dim)


def measure_coverage(table: WordEmbeddingTable, corpus: list[list[str]]) -> float:
    total = sum(len(tokens) for tokens in corpus)
    if total == 0:
        return 0.0
    found = sum(1 for tokens in corpus for t in tokens if t in table.vectors)
    return found / total


def w2v_tfidf_encode(
    table: WordEmbeddingTable, model: TfidfModel, tokens: list[str]
) -> np.ndarray | None:
    """tf*idf-weighted mean of word vectors, L2-normalized.

    Returns None (caller flags the article textless) when no token is covered
    by both the table and the vocabulary, or when the weighted mean cancels
    to the zero vector.
    """
    weights = tfidf_transform(model, tokens)
    acc = np.zeros(table.dim)
    total_w = 0.0
    for token, w in weights.items():
        vec = table.vectors.get(token)
        if vec is not None:
            acc += w * vec
            total_w += w
    if total_w == 0.0:
        return None
    acc /= total_w
    norm = np.linalg.norm(acc)
    if norm < 1e-12:
        return None
    return acc / norm
