"""Hybrid next-article ranker: GRU session encoder + candidate relevance head.

The head projects each candidate feature vector through a tanh dense layer
to the hidden size, then scores [h, e, h*e] with a one-hidden-layer tanh
perceptron. Training minimizes a sampled softmax over the true next article
(column 0) and sampled negatives. All gradients are hand-derived; the GRU
recurrence runs on a swappable kernel backend.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import kernels


def sampled_softmax_loss(
    scores: np.ndarray, mask: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row loss -log(exp(s0) / sum_valid exp(s)) and the softmax probs.

    `scores` is (P, C) with the positive in column 0; `mask` marks valid
    candidate slots (column 0 must always be valid).
    """
    s = np.array(scores, dtype=np.float64, copy=True)
    if mask is not None:
        s[~mask] = -np.inf
    m = s.max(axis=1, keepdims=True)
    ex = np.exp(s - m)
    denom = ex.sum(axis=1, keepdims=True)
    probs = ex / denom
    loss = np.log(denom[:, 0]) + m[:, 0] - scores[:, 0]
    return loss, probs


def uniform_score_loss(n_negatives: int) -> float:
    """Loss when the positive and all negatives score identically."""
    return float(np.log(1.0 + n_negatives))


@dataclass
class ScoreCache:
    e: np.ndarray  # (P, C, d_h) projected candidates
    u: np.ndarray  # (P, C, 3*d_h) head input
    m: np.ndarray  # (P, C, scorer_hidden)
    h_states: np.ndarray  # (P, d_h)


class NarCore:
    """The network over pre-assembled input/candidate feature vectors."""

    def __init__(
        self,
        d_input: int,
        d_candidate: int,
        hidden: int = 64,
        scorer_hidden: int = 128,
        seed: int = 0,
        backend: str | None = None,
    ):
        self.d_input = d_input
        self.d_candidate = d_candidate
        self.hidden = hidden
        self.scorer_hidden = scorer_hidden
        self.kernel = kernels.get_backend(backend)

        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(hidden)

        def w(*shape: int) -> np.ndarray:
            return rng.uniform(-bound, bound, size=shape)

        self.params: dict[str, np.ndarray] = {
            "gru_wx": w(d_input, 3 * hidden),
            "gru_wh": w(hidden, 3 * hidden),
            "gru_b": np.zeros(3 * hidden),
            "proj_w": w(d_candidate, hidden),
            "proj_b": np.zeros(hidden),
            "score_w1": w(3 * hidden, scorer_hidden),
            "score_b1": np.zeros(scorer_hidden),
            "score_w2": w(scorer_hidden, 1),
            "score_b2": np.zeros(1),
        }

    # --- forward pieces ----------------------------------------------------

    def session_states(self, x: np.ndarray):
        """GRU states for a (T, B, d_input) batch; h[t] encodes the prefix
        of length t+1."""
        h0 = np.zeros((x.shape[1], self.hidden))
        p = self.params
        return self.kernel.gru_forward(x, h0, p["gru_wx"], p["gru_wh"], p["gru_b"])

    def _head_forward(self, h_states: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, ScoreCache]:
        p = self.params
        e = np.tanh(cand @ p["proj_w"] + p["proj_b"])  # (P, C, d_h)
        hs = h_states[:, None, :]
        u = np.concatenate([np.broadcast_to(hs, e.shape), e, hs * e], axis=2)
        m = np.tanh(u @ p["score_w1"] + p["score_b1"])
        scores = (m @ p["score_w2"])[..., 0] + p["score_b2"][0]
        return scores, ScoreCache(e=e, u=u, m=m, h_states=h_states)

    def score_candidates(self, h_state: np.ndarray, cand: np.ndarray) -> np.ndarray:
        """Relevance of each candidate (rows of `cand`) to one session state."""
        scores, _ = self._head_forward(h_state[None, :], cand[None, :, :])
        return scores[0]

    # --- training ----------------------------------------------------------

    def loss_and_grads(
        self,
        x: np.ndarray,
        pos_t: np.ndarray,
        pos_b: np.ndarray,
        cand: np.ndarray,
        cand_mask: np.ndarray | None = None,
    ):
        """Mean sampled-softmax loss over prediction positions, with grads.

        x: (T, B, d_input); position k predicts from state h[pos_t[k], pos_b[k]]
        and ranks cand[k] (positive at column 0). Returns
        (loss, param grads, d_x, d_cand) so callers can push gradients into
        embedding tables.
        """
        p = self.params
        T, B, _ = x.shape
        h, cache = self.session_states(x)
        h_states = h[pos_t, pos_b]  # (P, d_h)
        scores, sc = self._head_forward(h_states, cand)
        losses, probs = sampled_softmax_loss(scores, cand_mask)
        n_pos = len(losses)
        loss = float(losses.mean())

        dscores = probs.copy()
        dscores[:, 0] -= 1.0
        dscores /= n_pos
        if cand_mask is not None:
            dscores[~cand_mask] = 0.0

        d_h = self.hidden
        dm = (dscores[..., None] * p["score_w2"][None, None, :, 0]) * (1.0 - sc.m**2)
        sh = self.scorer_hidden
        dw2 = sc.m.reshape(-1, sh).T @ dscores.reshape(-1, 1)
        db2 = np.array([dscores.sum()])
        du = dm @ p["score_w1"].T
        dw1 = sc.u.reshape(-1, 3 * d_h).T @ dm.reshape(-1, sh)
        db1 = dm.sum(axis=(0, 1))
        hs = sc.h_states[:, None, :]
        dhs = du[:, :, :d_h].sum(axis=1) + (du[:, :, 2 * d_h :] * sc.e).sum(axis=1)
        de = du[:, :, d_h : 2 * d_h] + du[:, :, 2 * d_h :] * hs
        da_e = de * (1.0 - sc.e**2)
        dwp = cand.reshape(-1, self.d_candidate).T @ da_e.reshape(-1, d_h)
        dbp = da_e.sum(axis=(0, 1))
        d_cand = da_e @ p["proj_w"].T

        dh_out = np.zeros((T, B, d_h))
        np.add.at(dh_out, (pos_t, pos_b), dhs)
        dx, dwx, dwh, db, _ = self.kernel.gru_backward(
            x, np.zeros((B, d_h)), p["gru_wx"], p["gru_wh"], p["gru_b"], h, cache, dh_out
        )

        grads = {
            "gru_wx": dwx,
            "gru_wh": dwh,
            "gru_b": db,
            "proj_w": dwp,
            "proj_b": dbp,
            "score_w1": dw1,
            "score_b1": db1,
            "score_w2": dw2,
            "score_b2": db2,
        }
        return loss, grads, dx, d_cand

    def state_digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name]).tobytes())
        return h.digest()


def gru_step(
    wx: np.ndarray, wh: np.ndarray, b: np.ndarray, x_t: np.ndarray, h_prev: np.ndarray
) -> np.ndarray:
    """One GRU recurrence step for a (B, d_in) input slice."""
    backend = kernels.get_backend()
    h, _ = backend.gru_forward(x_t[None, :, :], h_prev, wx, wh, b)
    return h[0]


class Adam:
    """Adam with bias correction; one shared step count for all tensors."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        b1c = 1.0 - self.beta1**self.step_count
        b2c = 1.0 - self.beta2**self.step_count
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            self.params[name] -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    def state_digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update(str(self.step_count).encode())
        for name in sorted(self.m):
            h.update(self.m[name].tobytes())
            h.update(self.v[name].tobytes())
        return h.digest()
