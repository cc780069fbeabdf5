"""Paragraph vectors trained with the distributed bag-of-words objective.

For each (document, token) pair the model maximizes
log sigmoid(v_d . u_t) + sum_neg log sigmoid(-v_d . u_n) with negatives drawn
from the unigram^0.75 distribution. Only this variant is implemented; the
choice is recorded in embedding manifests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class Doc2vecModel:
    doc_vectors: np.ndarray  # (n_docs, dim), raw (not normalized)
    output_weights: np.ndarray  # (|V|, dim)
    vocabulary: dict[str, int]
    noise_probs: np.ndarray  # unigram^0.75 sampling distribution
    dim: int
    epochs: int
    negatives: int
    lr0: float
    lr_min: float
    seed: int
    epoch_losses: list[float] = field(default_factory=list)

    def document_embedding(self, doc_index: int) -> np.ndarray:
        vec = self.doc_vectors[doc_index]
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            return np.zeros_like(vec)
        return vec / norm


def _pair_arrays(corpus: list[list[str]], vocabulary: dict[str, int]) -> tuple[np.ndarray, np.ndarray]:
    docs: list[int] = []
    toks: list[int] = []
    for d, tokens in enumerate(corpus):
        for t in tokens:
            j = vocabulary.get(t)
            if j is not None:
                docs.append(d)
                toks.append(j)
    return np.array(docs, dtype=np.int64), np.array(toks, dtype=np.int64)


def _sgd_pass(
    doc_vecs: np.ndarray,
    out_weights: np.ndarray,
    docs: np.ndarray,
    toks: np.ndarray,
    noise_probs: np.ndarray,
    rng: np.random.Generator,
    negatives: int,
    lr_for_step,
    step0: int,
    batch: int = 512,
    freeze_outputs: bool = False,
) -> tuple[float, int]:
    """One shuffled pass over the (doc, token) pairs. Returns (mean pair
    loss, step counter after the pass). Updates within a batch use the
    pre-update weights, so results are deterministic for a fixed seed."""
    order = rng.permutation(len(docs))
    n_vocab = len(noise_probs)
    total_loss = 0.0
    step = step0
    for lo in range(0, len(order), batch):
        idx = order[lo : lo + batch]
        d_idx, t_idx = docs[idx], toks[idx]
        neg_idx = rng.choice(n_vocab, size=(len(idx), negatives), p=noise_probs)
        cand = np.concatenate([t_idx[:, None], neg_idx], axis=1)  # (B, 1+neg)
        v = doc_vecs[d_idx]  # (B, dim)
        u = out_weights[cand]  # (B, 1+neg, dim)
        scores = np.einsum("bd,bkd->bk", v, u)
        sig = _sigmoid(scores)
        labels = np.zeros_like(sig)
        labels[:, 0] = 1.0
        # -log sigmoid(s) for the positive, -log sigmoid(-s) for negatives
        loss = -np.log(np.clip(sig[:, 0], 1e-12, None)).sum()
        loss += -np.log(np.clip(1.0 - sig[:, 1:], 1e-12, None)).sum()
        total_loss += loss
        lr = lr_for_step(step)
        step += len(idx)
        err = sig - labels  # (B, 1+neg)
        grad_v = np.einsum("bk,bkd->bd", err, u)
        np.add.at(doc_vecs, d_idx, -lr * grad_v)
        if not freeze_outputs:
            grad_u = err[:, :, None] * v[:, None, :]
            np.add.at(out_weights, cand, -lr * grad_u)
    return total_loss / max(len(order), 1), step


def doc2vec_fit(
    corpus: list[list[str]],
    dim: int = 250,
    epochs: int = 10,
    negatives: int = 5,
    seed: int = 0,
    lr0: float = 0.025,
    lr_min: float = 1e-4,
) -> Doc2vecModel:
    """Train document vectors on a tokenized corpus. Deterministic per seed."""
    if len(corpus) < 2:
        raise DataError("doc2vec_fit: need at least 2 documents")
    vocab_tokens = sorted({t for tokens in corpus for t in tokens})
    if not vocab_tokens:
        raise DataError("doc2vec_fit: corpus has no tokens")
    vocabulary = {t: i for i, t in enumerate(vocab_tokens)}
    counts = np.zeros(len(vocabulary))
    for tokens in corpus:
        for t in tokens:
            counts[vocabulary[t]] += 1
    noise = counts**0.75
    noise_probs = noise / noise.sum()

    rng = np.random.default_rng(seed)
    doc_vecs = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(corpus), dim))
    out_weights = np.zeros((len(vocabulary), dim))

    docs, toks = _pair_arrays(corpus, vocabulary)
    total_steps = max(epochs * len(docs), 1)

    def lr_for_step(step: int) -> float:
        return max(lr_min, lr0 * (1.0 - step / total_steps))

    epoch_losses: list[float] = []
    step = 0
    for _ in range(epochs):
        mean_loss, step = _sgd_pass(
            doc_vecs, out_weights, docs, toks, noise_probs, rng, negatives, lr_for_step, step
        )
        epoch_losses.append(mean_loss)

    return Doc2vecModel(
        doc_vectors=doc_vecs,
        output_weights=out_weights,
        vocabulary=vocabulary,
        noise_probs=noise_probs,
        dim=dim,
        epochs=epochs,
        negatives=negatives,
        lr0=lr0,
        lr_min=lr_min,
        seed=seed,
        epoch_losses=epoch_losses,
    )


def doc2vec_infer(
    model: Doc2vecModel, tokens: list[str], steps: int = 20, seed: int = 0
) -> np.ndarray | None:
    """Optimize a fresh vector against frozen output weights; L2-normalized.

    Returns None when no token is in the vocabulary (textless document).
    """
    tok_idx = np.array(
        [model.vocabulary[t] for t in tokens if t in model.vocabulary], dtype=np.int64
    )
    if tok_idx.size == 0:
        return None
    rng = np.random.default_rng(seed)
    vec = rng.uniform(-0.5 / model.dim, 0.5 / model.dim, size=(1, model.dim))
    docs = np.zeros(tok_idx.size, dtype=np.int64)
    total_steps = max(steps * tok_idx.size, 1)

    def lr_for_step(step: int) -> float:
        return max(model.lr_min, model.lr0 * (1.0 - step / total_steps))

    step = 0
    for _ in range(steps):
        _, step = _sgd_pass(
            vec,
            model.output_weights,
            docs,
            tok_idx,
            model.noise_probs,
            rng,
            model.negatives,
            lr_for_step,
            step,
            freeze_outputs=True,
        )
    norm = np.linalg.norm(vec[0])
    if norm < 1e-12:
        return None
    return vec[0] / norm
