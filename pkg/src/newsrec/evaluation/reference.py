"""Reference scorers for validating the protocol itself.

Both are stateless, so the frozen-state contract holds trivially and their
rankings are independent of evaluation order.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from ..types import Session


class RandomScorer:
    """Exchangeable uniform scores: the positive's rank is uniform over the
    candidate list, giving closed-form expectations for HR and MRR.

    Scores are a keyed hash of (seed, session, prefix length, candidate id)
    mapped to [0, 1), so repeated runs and shuffled sample orders agree.
    """

    sample_aware = True
    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def score_sample(self, sample, candidate_ids: list[str]) -> np.ndarray:
        out = np.empty(len(candidate_ids))
        for i, article_id in enumerate(candidate_ids):
            key = f"{self.seed}|{sample.session_id}|{sample.prefix_len}|{article_id}"
            digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
            (value,) = struct.unpack("<Q", digest)
            out[i] = value / 2.0**64
        return out

    def observe_session(self, session: Session) -> None:
        pass

    def state_digest(self) -> bytes:
        return str(self.seed).encode()


class OracleScorer:
    """Scores the true next article above every negative; HR and MRR are 1
    by construction."""

    sample_aware = True
    name = "oracle"

    def score_sample(self, sample, candidate_ids: list[str]) -> np.ndarray:
        return np.array([1.0 if c == sample.positive else 0.0 for c in candidate_ids])

    def observe_session(self, session: Session) -> None:
        pass

    def state_digest(self) -> bytes:
        return b"oracle"
