"""Online training and scoring for the hybrid ranker.

Sessions stream in once each; they buffer into mini-batches (default 64
sessions) and every full batch triggers exactly one optimizer step. The
evaluation driver flushes the partial batch at hour boundaries, matching a
train-and-redeploy-once-an-hour regime.
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np

from ..types import ClickEvent, Session
from .features import Featurizer
from .model import Adam, NarCore

log = logging.getLogger(__name__)


class NarRecommender:
    """Shared recommender interface around the core network, its featurizer,
    and the optimizer."""

    def __init__(
        self,
        featurizer: Featurizer,
        hidden: int = 64,
        scorer_hidden: int = 128,
        lr: float = 1e-3,
        batch_size: int = 64,
        n_train_negatives: int = 10,
        seed: int = 0,
        name: str = "nar",
    ):
        self.name = name
        self.featurizer = featurizer
        spec = featurizer.spec
        self.core = NarCore(
            d_input=spec.d_input,
            d_candidate=spec.d_candidate,
            hidden=hidden,
            scorer_hidden=scorer_hidden,
            seed=seed,
        )
        trainable = dict(self.core.params)
        trainable.update(featurizer.tables)
        self.optimizer = Adam(trainable, lr=lr)
        self.batch_size = batch_size
        self.n_train_negatives = n_train_negatives
        self._rng = np.random.default_rng(seed)
        self._pending: list[tuple[Session, list[str]]] = []
        self._warned_hours: set[int] = set()
        self.last_loss: float | None = None

    # --- training ----------------------------------------------------------

    def submit_session(self, session: Session, pool: list[str], hour: int | None = None) -> None:
        """Queue one session with its negative pool; trains when a full
        batch accumulates."""
        eligible = [a for a in pool if a not in set(session.article_ids)]
        if len(eligible) < self.n_train_negatives and (hour is None or hour not in self._warned_hours):
            log.warning(
                "negative pool has %d eligible articles (< %d requested)",
                len(eligible),
                self.n_train_negatives,
            )
            if hour is not None:
                self._warned_hours.add(hour)
        self._pending.append((session, eligible))
        if len(self._pending) >= self.batch_size:
            self.flush()

    def flush(self) -> float | None:
        """Train on the buffered sessions (one optimizer step); returns the
        batch loss, or None when the buffer was empty."""
        if not self._pending:
            return None
        batch = self._pending
        self._pending = []
        loss = self._train_batch(batch)
        self.last_loss = loss
        return loss

    def train_on_session(self, session: Session, pool: list[str]) -> float | None:
        """Immediate single-session batch (bypasses buffering); test hook."""
        eligible = [a for a in pool if a not in set(session.article_ids)]
        return self._train_batch([(session, eligible)])

    def _train_batch(self, batch: list[tuple[Session, list[str]]]) -> float | None:
        spec = self.featurizer.spec
        lengths = [len(s) for s, _ in batch]
        t_max = max(lengths)
        b_size = len(batch)

        flat_clicks: list[ClickEvent] = []
        offsets: list[int] = []
        for session, _ in batch:
            offsets.append(len(flat_clicks))
            flat_clicks.extend(session.clicks)
        flat_x, input_meta = self.featurizer.input_matrix(flat_clicks, train=True)

        x = np.zeros((t_max, b_size, spec.d_input))
        for b, (session, _) in enumerate(batch):
            n = lengths[b]
            x[:n, b, :] = flat_x[offsets[b] : offsets[b] + n]

        pos_t: list[int] = []
        pos_b: list[int] = []
        cand_ids: list[list[str]] = []
        cand_now: list[float] = []
        for b, (session, eligible) in enumerate(batch):
            for t in range(1, lengths[b]):
                n_neg = min(self.n_train_negatives, len(eligible))
                if n_neg == 0:
                    continue
                picks = self._rng.choice(len(eligible), size=n_neg, replace=False)
                positive = session.clicks[t].article_id
                cand_ids.append([positive] + [eligible[i] for i in picks])
                cand_now.append(session.clicks[t].ts)
                pos_t.append(t - 1)
                pos_b.append(b)
        if not cand_ids:
            return None

        c_max = max(len(ids) for ids in cand_ids)
        n_pos = len(cand_ids)
        flat_ids = [a for ids in cand_ids for a in ids]
        flat_now = np.repeat(np.array(cand_now), [len(ids) for ids in cand_ids])
        flat_cand, cand_meta = self.featurizer.candidate_matrix(flat_ids, flat_now, train=False)

        cand = np.zeros((n_pos, c_max, spec.d_candidate))
        mask = np.zeros((n_pos, c_max), dtype=bool)
        cursor = 0
        for k, ids in enumerate(cand_ids):
            n = len(ids)
            cand[k, :n] = flat_cand[cursor : cursor + n]
            mask[k, :n] = True
            cursor += n

        loss, grads, dx, d_cand = self.core.loss_and_grads(
            x, np.array(pos_t), np.array(pos_b), cand, mask
        )

        table_grads = self.featurizer.zero_table_grads()
        flat_dx = np.empty_like(flat_x)
        for b in range(b_size):
            n = lengths[b]
            flat_dx[offsets[b] : offsets[b] + n] = dx[:n, b, :]
        self.featurizer.scatter_grads(flat_dx, input_meta, table_grads)

        flat_dcand = np.empty_like(flat_cand)
        cursor = 0
        for k, ids in enumerate(cand_ids):
            n = len(ids)
            flat_dcand[cursor : cursor + n] = d_cand[k, :n]
            cursor += n
        self.featurizer.scatter_grads(flat_dcand, cand_meta, table_grads)

        grads.update(table_grads)
        self.optimizer.step(grads)
        return loss

    # --- scoring -----------------------------------------------------------

    def score(self, prefix: tuple[ClickEvent, ...], candidate_ids: list[str], now: float) -> np.ndarray:
        """Forward the prefix once and score every candidate against the
        final state."""
        x, _ = self.featurizer.input_matrix(list(prefix), train=False)
        h, _ = self.core.session_states(x[:, None, :])
        cand, _ = self.featurizer.candidate_matrix(candidate_ids, now, train=False)
        return self.core.score_candidates(h[-1, 0], cand)

    def score_session(
        self,
        clicks: tuple[ClickEvent, ...],
        positions: list[tuple[int, list[str], float]],
    ) -> list[np.ndarray]:
        """Score many (prefix_length, candidates, now) tasks for one session
        with a single GRU forward pass."""
        x, _ = self.featurizer.input_matrix(list(clicks), train=False)
        h, _ = self.core.session_states(x[:, None, :])
        spec = self.featurizer.spec
        c_max = max(len(ids) for _, ids, _ in positions)
        n_pos = len(positions)
        flat_ids = [a for _, ids, _ in positions for a in ids]
        flat_now = np.repeat(
            np.array([now for _, _, now in positions]),
            [len(ids) for _, ids, _ in positions],
        )
        flat_cand, _ = self.featurizer.candidate_matrix(flat_ids, flat_now, train=False)
        cand = np.zeros((n_pos, c_max, spec.d_candidate))
        mask = np.zeros((n_pos, c_max), dtype=bool)
        cursor = 0
        for k, (_, ids, _) in enumerate(positions):
            n = len(ids)
            cand[k, :n] = flat_cand[cursor : cursor + n]
            mask[k, :n] = True
            cursor += n
        h_states = np.stack([h[t - 1, 0] for t, _, _ in positions])
        scores, _ = self.core._head_forward(h_states, cand)
        return [scores[k, : mask[k].sum()] for k in range(n_pos)]

    def observe_session(self, session: Session) -> None:
        raise TypeError("NarRecommender trains via submit_session(session, pool)")

    def state_digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update(self.core.state_digest())
        h.update(self.featurizer.state_digest())
        h.update(self.optimizer.state_digest())
        for session, _ in self._pending:
            h.update(session.session_id.encode())
        return h.digest()
