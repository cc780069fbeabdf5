"""Laplace-smoothed click-popularity estimates over the stream so far.

p(i) = (count_i + 1) / (total + #distinct articles seen). Shared by the
novelty input feature and the rank-discounted self-information metric.
"""

from __future__ import annotations

import hashlib
import math


class PopularityEstimator:
    def __init__(self) -> None:
        self.counts: dict[str, int] = {}
        self.total = 0

    def observe(self, article_id: str) -> None:
        self.counts[article_id] = self.counts.get(article_id, 0) + 1
        self.total += 1

    def probability(self, article_id: str) -> float:
        denom = self.total + len(self.counts)
        if denom == 0:
            return 1.0
        return (self.counts.get(article_id, 0) + 1) / denom

    def self_information(self, article_id: str) -> float:
        """-log2 p(i), the novelty of recommending article i."""
        return -math.log2(self.probability(article_id))

    def state_digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update(str(self.total).encode())
        for item in sorted(self.counts.items()):
            h.update(repr(item).encode())
        return h.digest()
