"""Pure-numpy GRU sequence kernels (fallback backend).

Shapes: x (T, B, d_in), h0 (B, d_h), wx (d_in, 3*d_h), wh (d_h, 3*d_h),
b (3*d_h,). Gate order along the last axis is [update | reset | candidate];
the candidate pre-activation uses U_c @ (r * h_prev). The new state is
h = (1 - z) * h_prev + z * hbar.

Padded timesteps are safe: callers inject zero output-gradient there, and a
zero gradient stays zero through the recurrence, so no explicit masking is
needed.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gru_forward(x, h0, wx, wh, b):
    """Returns (h, cache); h[t] is the state after consuming x[t]."""
    T, B, d_in = x.shape
    d_h = h0.shape[1]
    gx = (x.reshape(T * B, d_in) @ wx + b).reshape(T, B, 3 * d_h)
    h = np.empty((T, B, d_h))
    z = np.empty_like(h)
    r = np.empty_like(h)
    hbar = np.empty_like(h)
    rh = np.empty_like(h)
    h_prev = h0
    for t in range(T):
        gzr = h_prev @ wh[:, : 2 * d_h]
        z[t] = _sigmoid(gx[t, :, :d_h] + gzr[:, :d_h])
        r[t] = _sigmoid(gx[t, :, d_h : 2 * d_h] + gzr[:, d_h:])
        rh[t] = r[t] * h_prev
        hbar[t] = np.tanh(gx[t, :, 2 * d_h :] + rh[t] @ wh[:, 2 * d_h :])
        h[t] = (1.0 - z[t]) * h_prev + z[t] * hbar[t]
        h_prev = h[t]
    return h, (z, r, hbar, rh)


def gru_backward(x, h0, wx, wh, b, h, cache, dh_out):
    """Backprop through time. `dh_out` holds the per-step gradients flowing
    into each h[t]. Returns (dx, dwx, dwh, db, dh0)."""
    z, r, hbar, rh = cache
    T, B, d_in = x.shape
    d_h = h0.shape[1]
    dgx = np.empty((T, B, 3 * d_h))
    dwh = np.zeros_like(wh)
    carry = np.zeros((B, d_h))
    for t in range(T - 1, -1, -1):
        h_prev = h[t - 1] if t > 0 else h0
        dht = dh_out[t] + carry
        dz = dht * (hbar[t] - h_prev)
        dc = dht * z[t]
        carry = dht * (1.0 - z[t])
        da_c = dc * (1.0 - hbar[t] * hbar[t])
        drh = da_c @ wh[:, 2 * d_h :].T
        carry += drh * r[t]
        dr = drh * h_prev
        da_r = dr * r[t] * (1.0 - r[t])
        da_z = dz * z[t] * (1.0 - z[t])
        dgx[t, :, :d_h] = da_z
        dgx[t, :, d_h : 2 * d_h] = da_r
        dgx[t, :, 2 * d_h :] = da_c
        dwh[:, :d_h] += h_prev.T @ da_z
        dwh[:, d_h : 2 * d_h] += h_prev.T @ da_r
        dwh[:, 2 * d_h :] += rh[t].T @ da_c
        carry += da_z @ wh[:, :d_h].T + da_r @ wh[:, d_h : 2 * d_h].T
    dgx_flat = dgx.reshape(T * B, 3 * d_h)
    dwx = x.reshape(T * B, d_in).T @ dgx_flat
    dx = (dgx_flat @ wx.T).reshape(T, B, d_in)
    db = dgx_flat.sum(axis=0)
    return dx, dwx, dwh, db, carry
