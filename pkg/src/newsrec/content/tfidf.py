"""TF-IDF weighting with smoothed inverse document frequency.

weight(t, d) = tf(t, d) * idf(t), idf(t) = ln((1 + N) / (1 + df(t))) + 1.
The +1 smoothing keeps idf strictly positive and well-defined for fold-in
documents whose terms were never seen at fit time (they are simply ignored).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DataError


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray  # (|V|,), aligned with vocabulary indices
    df_threshold: int
    n_docs: int

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)


def tfidf_fit(corpus: list[list[str]], df_threshold: int = 1) -> TfidfModel:
    """Build vocabulary and idf weights from a tokenized corpus.

    Tokens appearing in fewer than `df_threshold` documents are dropped.
    """
    if not corpus:
        raise DataError("tfidf_fit: empty corpus")
    df: Counter[str] = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    kept = sorted(t for t, c in df.items() if c >= df_threshold)
    if not kept:
        raise DataError(
            f"tfidf_fit: no token reaches document frequency {df_threshold}"
        )
    vocabulary = {t: i for i, t in enumerate(kept)}
    n = len(corpus)
    idf = np.array(
        [math.log((1 + n) / (1 + df[t])) + 1.0 for t in kept], dtype=np.float64
    )
    return TfidfModel(vocabulary=vocabulary, idf=idf, df_threshold=df_threshold, n_docs=n)


def tfidf_transform(model: TfidfModel, tokens: list[str]) -> dict[str, float]:
    """Per-token tf*idf weights for one document; unseen tokens are ignored."""
    counts = Counter(t for t in tokens if t in model.vocabulary)
    return {t: c * model.idf[model.vocabulary[t]] for t, c in counts.items()}


def tfidf_matrix(model: TfidfModel, corpus: list[list[str]]) -> sparse.csr_matrix:
    """Stacked tf*idf rows (docs x |V|) for SVD and batch encoding."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for tokens in corpus:
        counts = Counter(t for t in tokens if t in model.vocabulary)
        for t, c in sorted(counts.items()):
            j = model.vocabulary[t]
            indices.append(j)
            data.append(c * model.idf[j])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(corpus), model.vocab_size),
    )
