"""Versioned binary snapshots of a trained ranker.

One .npz container holds every parameter tensor, optimizer moments, the
scalar running statistics, and the feature layout. Loading restores the
learned state onto a recommender rebuilt against the same corpus context
(catalog, embeddings, popularity estimator), which the run manifest records.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from .training import NarRecommender

SNAPSHOT_VERSION = 1


def save_snapshot(rec: NarRecommender, path: str | Path) -> None:
    spec = rec.featurizer.spec
    meta = {
        "version": SNAPSHOT_VERSION,
        "name": rec.name,
        "hidden": rec.core.hidden,
        "scorer_hidden": rec.core.scorer_hidden,
        "batch_size": rec.batch_size,
        "n_train_negatives": rec.n_train_negatives,
        "lr": rec.optimizer.lr,
        "step_count": rec.optimizer.step_count,
        "feature_spec": {
            "use_ace": spec.use_ace,
            "d_ace": spec.d_ace,
            "category_dim": spec.category_dim,
            "author_dim": spec.author_dim,
            "context_dim": spec.context_dim,
            "with_author": spec.with_author,
        },
        "novelty_stats": rec.featurizer.novelty_stats.state(),
        "recency_stats": rec.featurizer.recency_stats.state(),
    }
    arrays: dict[str, np.ndarray] = {}
    for k, v in rec.core.params.items():
        arrays[f"param/{k}"] = v
    for k, v in rec.featurizer.tables.items():
        arrays[f"table/{k}"] = v
    for k, v in rec.optimizer.m.items():
        arrays[f"adam_m/{k}"] = v
    for k, v in rec.optimizer.v.items():
        arrays[f"adam_v/{k}"] = v
    arrays["meta_json"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **arrays)


def load_snapshot(rec: NarRecommender, path: str | Path) -> dict:
    """Restore tensors and statistics in place; returns the snapshot meta."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta_json"].tobytes()).decode("utf-8"))
        if meta.get("version") != SNAPSHOT_VERSION:
            raise DataError(f"{path}: unsupported snapshot version {meta.get('version')}")
        for k in rec.core.params:
            rec.core.params[k][...] = data[f"param/{k}"]
        for k in rec.featurizer.tables:
            rec.featurizer.tables[k][...] = data[f"table/{k}"]
        for k in rec.optimizer.m:
            key = k
            rec.optimizer.m[k][...] = data[f"adam_m/{key}"]
            rec.optimizer.v[k][...] = data[f"adam_v/{key}"]
    rec.optimizer.step_count = meta["step_count"]
    count, mean, m2 = meta["novelty_stats"]
    stats = rec.featurizer.novelty_stats
    stats.count, stats.mean, stats.m2 = int(count), float(mean), float(m2)
    count, mean, m2 = meta["recency_stats"]
    stats = rec.featurizer.recency_stats
    stats.count, stats.mean, stats.m2 = int(count), float(mean), float(m2)
    return meta
