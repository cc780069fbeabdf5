"""Input feature assembly for the hybrid ranker.

Per-click input vector layout (fixed at model build):

    [ content embedding + presence bit ]   only when use_ace
    [ category embedding ]                 trainable
    [ author embedding ]                   trainable, only when the corpus has authors
    [ novelty ]                            -log2 p(article), standardized
    [ recency ]                            ln(1 + hours since publish), standardized
    [ device | os | referrer | day-of-week embeddings ]   trainable
    [ hour-of-day sin, cos ]

Candidate vectors reuse the leading article-side block (everything above the
user-context embeddings). Scalar standardization uses running mean/variance
updated only while assembling training inputs, so evaluation never leaks
statistics from the hour under test.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from ..popularity import PopularityEstimator
from ..types import Article, Catalog, ClickEvent

STANDARDIZE_EPS = 1e-8


@dataclass
class FeatureSpec:
    use_ace: bool
    d_ace: int
    category_dim: int = 8
    author_dim: int = 8
    context_dim: int = 4  # each of device / os / referrer / day-of-week
    with_author: bool = False

    @property
    def d_candidate(self) -> int:
        d = self.category_dim + 2  # + novelty + recency
        if self.use_ace:
            d += self.d_ace + 1
        if self.with_author:
            d += self.author_dim
        return d

    @property
    def d_input(self) -> int:
        return self.d_candidate + 4 * self.context_dim + 2


class RunningStats:
    """Welford mean/variance accumulator for one scalar feature."""

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values: np.ndarray) -> None:
        for v in values:
            self.count += 1
            delta = v - self.mean
            self.mean += delta / self.count
            self.m2 += delta * (v - self.mean)

    def standardize(self, values: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return values
        var = self.m2 / (self.count - 1)
        return (values - self.mean) / math.sqrt(var + STANDARDIZE_EPS)

    def state(self) -> tuple[int, float, float]:
        return (self.count, self.mean, self.m2)


def hour_of_day(ts: float) -> int:
    return int(ts // 3600) % 24

def day_of_week(ts: float) -> int:
    return int(ts // 86400 + 4) % 7  # epoch day zero was a Thursday


@dataclass
class AssemblyMeta:
    """Index arrays needed to scatter input gradients back into the
    embedding tables."""

    rows: dict[str, np.ndarray] = field(default_factory=dict)  # table -> row index per sample
    slices: dict[str, slice] = field(default_factory=dict)  # table -> columns in the vector


class Featurizer:
    """Turns clicks and candidate articles into dense model inputs and owns
    the trainable embedding tables."""

    def __init__(
        self,
        spec: FeatureSpec,
        catalog: Catalog,
        embeddings,
        popularity: PopularityEstimator,
        context_values: dict[str, list[str]],
        seed: int = 0,
    ):
        self.spec = spec
        self.catalog = catalog
        self.embeddings = embeddings
        self.popularity = popularity

        ids = catalog.ids
        self._ids = ids
        self._article_row = {a: i for i, a in enumerate(ids)}
        self._publish = np.array([catalog[a].published_at for a in ids])
        categories = sorted({catalog[a].category_id for a in ids})
        self._category_index = {c: i + 1 for i, c in enumerate(categories)}
        self._article_category = np.array(
            [self._category_index[catalog[a].category_id] for a in ids], dtype=np.int64
        )
        authors = sorted({catalog[a].author_id for a in ids if catalog[a].author_id is not None})
        self._author_index = {c: i + 1 for i, c in enumerate(authors)}
        self._article_author = np.array(
            [
                self._author_index.get(catalog[a].author_id, 0)
                if catalog[a].author_id is not None
                else 0
                for a in ids
            ],
            dtype=np.int64,
        )
        if spec.with_author and not authors:
            raise ValueError("author feature enabled but no article has an author")

        if spec.use_ace:
            self._ace = np.zeros((len(ids), spec.d_ace))
            self._ace_present = np.zeros(len(ids))
            for i, a in enumerate(ids):
                vec = embeddings.get(a) if embeddings is not None else None
                if vec is not None:
                    self._ace[i] = vec
                    self._ace_present[i] = 1.0

        self._context_index = {
            feature: {v: i + 1 for i, v in enumerate(sorted(set(values)))}
            for feature, values in context_values.items()
        }

        rng = np.random.default_rng(seed)

        def table(n_rows: int, dim: int) -> np.ndarray:
            return rng.uniform(-0.1, 0.1, size=(n_rows, dim))

        self.tables: dict[str, np.ndarray] = {
            "emb_category": table(len(categories) + 1, spec.category_dim),
            "emb_device": table(len(self._context_index.get("device", {})) + 1, spec.context_dim),
            "emb_os": table(len(self._context_index.get("os", {})) + 1, spec.context_dim),
            "emb_referrer": table(len(self._context_index.get("referrer", {})) + 1, spec.context_dim),
            "emb_dow": table(7, spec.context_dim),
        }
        if spec.with_author:
            self.tables["emb_author"] = table(len(authors) + 1, spec.author_dim)

        self.novelty_stats = RunningStats()
        self.recency_stats = RunningStats()

    # --- assembly ---------------------------------------------------------

    def _article_block(
        self, article_rows: np.ndarray, now: np.ndarray, train: bool, meta: AssemblyMeta
    ) -> np.ndarray:
        """The shared leading block: ACE, category, [author], novelty, recency."""
        spec = self.spec
        n = len(article_rows)
        out = np.zeros((n, spec.d_candidate))
        col = 0
        if spec.use_ace:
            out[:, col : col + spec.d_ace] = self._ace[article_rows]
            out[:, col + spec.d_ace] = self._ace_present[article_rows]
            col += spec.d_ace + 1
        cat_rows = self._article_category[article_rows]
        out[:, col : col + spec.category_dim] = self.tables["emb_category"][cat_rows]
        meta.rows["emb_category"] = cat_rows
        meta.slices["emb_category"] = slice(col, col + spec.category_dim)
        col += spec.category_dim
        if spec.with_author:
            author_rows = self._article_author[article_rows]
            out[:, col : col + spec.author_dim] = self.tables["emb_author"][author_rows]
            meta.rows["emb_author"] = author_rows
            meta.slices["emb_author"] = slice(col, col + spec.author_dim)
            col += spec.author_dim

        novelty = np.array(
            [self.popularity.self_information(self._ids[row]) for row in article_rows]
        )
        age_hours = np.maximum(now - self._publish[article_rows], 0.0) / 3600.0
        recency = np.log1p(age_hours)
        if train:
            self.novelty_stats.update(novelty)
            self.recency_stats.update(recency)
        out[:, col] = self.novelty_stats.standardize(novelty)
        out[:, col + 1] = self.recency_stats.standardize(recency)
        return out

    def candidate_matrix(
        self, article_ids: list[str], now: float | np.ndarray, train: bool = False
    ) -> tuple[np.ndarray, AssemblyMeta]:
        rows = np.array([self._article_row[a] for a in article_ids], dtype=np.int64)
        meta = AssemblyMeta()
        now_arr = np.broadcast_to(np.asarray(now, dtype=np.float64), (len(rows),))
        block = self._article_block(rows, now_arr, train, meta)
        return block, meta

    def input_matrix(
        self, clicks: list[ClickEvent], train: bool = False
    ) -> tuple[np.ndarray, AssemblyMeta]:
        spec = self.spec
        rows = np.array([self._article_row[c.article_id] for c in clicks], dtype=np.int64)
        now = np.array([c.ts for c in clicks])
        meta = AssemblyMeta()
        block = self._article_block(rows, now, train, meta)
        n = len(clicks)
        out = np.zeros((n, spec.d_input))
        out[:, : spec.d_candidate] = block
        col = spec.d_candidate
        for feature, getter in (
            ("device", lambda c: c.device),
            ("os", lambda c: c.os),
            ("referrer", lambda c: c.referrer),
        ):
            index = self._context_index.get(feature, {})
            feat_rows = np.array([index.get(getter(c), 0) for c in clicks], dtype=np.int64)
            table = f"emb_{feature}"
            out[:, col : col + spec.context_dim] = self.tables[table][feat_rows]
            meta.rows[table] = feat_rows
            meta.slices[table] = slice(col, col + spec.context_dim)
            col += spec.context_dim
        dow_rows = np.array([day_of_week(c.ts) for c in clicks], dtype=np.int64)
        out[:, col : col + spec.context_dim] = self.tables["emb_dow"][dow_rows]
        meta.rows["emb_dow"] = dow_rows
        meta.slices["emb_dow"] = slice(col, col + spec.context_dim)
        col += spec.context_dim
        hours = np.array([hour_of_day(c.ts) for c in clicks])
        out[:, col] = np.sin(2.0 * np.pi * hours / 24.0)
        out[:, col + 1] = np.cos(2.0 * np.pi * hours / 24.0)
        return out, meta

    def scatter_grads(
        self, grad_matrix: np.ndarray, meta: AssemblyMeta, grads: dict[str, np.ndarray]
    ) -> None:
        """Accumulate d(loss)/d(vector) slices into per-table gradients."""
        for table, rows in meta.rows.items():
            sl = meta.slices[table]
            np.add.at(grads[table], rows, grad_matrix[:, sl])

    def zero_table_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(t) for name, t in self.tables.items()}

    def state_digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        for name in sorted(self.tables):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.tables[name]).tobytes())
        for stats in (self.novelty_stats, self.recency_stats):
            h.update(repr(stats.state()).encode())
        return h.digest()
