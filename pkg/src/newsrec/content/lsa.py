"""Latent semantic analysis over tf*idf rows via randomized truncated SVD."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DataError

log = logging.getLogger(__name__)


@dataclass
class LsaModel:
    projection: np.ndarray  # (|V|, k), right singular vectors, orthonormal columns
    singular_values: np.ndarray  # (k,), non-increasing
    k: int


def randomized_truncated_svd(
    matrix,
    k: int,
    seed: int,
    n_oversample: int = 10,
    n_power_iters: int = 2,
    ritz_tol: float = 1e-10,
    max_extra_iters: int = 200,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k SVD from a randomized range finder with subspace iteration.

    Runs `n_power_iters` QR-stabilized power iterations, then keeps iterating
    until the top-k Ritz values stabilize (relative change < `ritz_tol`), so
    slowly decaying spectra still converge to oracle accuracy. Deterministic
    for a fixed seed.

    Returns (U, s, Vt) with U (m, k), s (k,) non-increasing, Vt (k, n).
    """
    m, n = matrix.shape
    p = min(k + n_oversample, min(m, n))
    rng = np.random.default_rng(seed)
    sketch = matrix @ rng.standard_normal((n, p))
    prev_ritz: np.ndarray | None = None
    for i in range(n_power_iters + max_extra_iters):
        sketch, _ = np.linalg.qr(sketch)
        if i >= n_power_iters:
            ritz = np.linalg.svd(sketch.T @ matrix, compute_uv=False)[:k]
            if prev_ritz is not None:
                change = np.abs(ritz - prev_ritz) / np.maximum(ritz, np.finfo(float).tiny)
                if change.max() < ritz_tol:
                    break
            prev_ritz = ritz
        sketch = matrix @ (matrix.T @ sketch)
    q, _ = np.linalg.qr(sketch)
    u_small, s, vt = np.linalg.svd(q.T @ matrix, full_matrices=False)
    u = q @ u_small
    return u[:, :k], s[:k], vt[:k]


def lsa_fit(tfidf_rows: sparse.csr_matrix, k: int, seed: int) -> LsaModel:
    """Fit the projection on a docs x |V| tf*idf matrix.

    A `k` above the matrix rank is reduced with a warning (trailing exact-zero
    singular directions carry no signal and break orthonormality).
    """
    if tfidf_rows.nnz == 0:
        raise DataError("lsa_fit: tf*idf matrix is all zeros")
    max_rank = min(tfidf_rows.shape)
    if k > max_rank:
        log.warning("lsa_fit: k=%d exceeds max rank %d, reducing", k, max_rank)
        k = max_rank
    _, s, vt = randomized_truncated_svd(tfidf_rows, k, seed)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
    if rank < k:
        log.warning("lsa_fit: matrix rank %d below k=%d, truncating", rank, k)
        s, vt = s[:rank], vt[:rank]
        k = rank
    return LsaModel(projection=np.ascontiguousarray(vt.T), singular_values=s, k=k)


def lsa_encode(model: LsaModel, weights: dict[str, float], vocabulary: dict[str, int]) -> np.ndarray | None:
    """Fold a tf*idf document vector into the latent space and L2-normalize.

    For corpus rows this equals the corresponding row of U*Sigma because the
    projection columns are right singular vectors. Returns None when the
    document has no weight in the vocabulary (textless).
    """
    vec = np.zeros(model.k)
    for token, w in weights.items():
        j = vocabulary.get(token)
        if j is not None:
            vec += w * model.projection[j]
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        return None
    return vec / norm


def lsa_encode_matrix(model: LsaModel, tfidf_rows: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Batch fold-in. Returns (embeddings, ok_mask); rows with no vocabulary
    mass get a zero vector and ok=False."""
    emb = tfidf_rows @ model.projection
    norms = np.linalg.norm(emb, axis=1)
    ok = norms >= 1e-12
    emb[ok] /= norms[ok, None]
    emb[~ok] = 0.0
    return emb, ok
