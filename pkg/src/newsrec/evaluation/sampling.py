"""Negative-candidate sampling for next-click ranking tasks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_EVAL_NEGATIVES = 50


@dataclass
class EvalSample:
    """One prediction task: rank the true next article among sampled
    recommendable negatives."""

    session_id: str
    prefix_len: int
    positive: str
    negatives: tuple[str, ...]
    pool_size: int  # eligible articles actually available (may be < requested)
    rankings: dict[str, list[str]] = field(default_factory=dict)  # per recommender

    @property
    def candidate_ids(self) -> list[str]:
        return [self.positive, *self.negatives]

    @property
    def short_pool(self) -> bool:
        return len(self.negatives) < N_EVAL_NEGATIVES


def sample_candidates(
    positive: str,
    session_viewed: set[str],
    preceding_hour_clicks: set[str],
    rng: np.random.Generator,
    n_negatives: int = N_EVAL_NEGATIVES,
) -> tuple[tuple[str, ...], int] | None:
    """Draw up to `n_negatives` distinct articles clicked by anyone in the
    preceding hour, excluding the session's own articles and the positive.

    Returns (negatives, eligible pool size), or None when the pool is empty
    (the sample is skipped and counted by the caller).
    """
    eligible = sorted(preceding_hour_clicks - session_viewed - {positive})
    if not eligible:
        return None
    n = min(n_negatives, len(eligible))
    picks = rng.choice(len(eligible), size=n, replace=False)
    return tuple(eligible[i] for i in picks), len(eligible)
