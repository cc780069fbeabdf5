import math

import numpy as np
import pytest

from newsrec.nar import kernels
from newsrec.nar.kernels import reference


def random_instance(rng, T=6, B=4, d_in=7, d_h=5):
    x = rng.standard_normal((T, B, d_in))
    h0 = rng.standard_normal((B, d_h)) * 0.1
    wx = rng.standard_normal((d_in, 3 * d_h)) * 0.4
    wh = rng.standard_normal((d_h, 3 * d_h)) * 0.4
    b = rng.standard_normal(3 * d_h) * 0.1
    return x, h0, wx, wh, b


def scalar_gru_oracle(x, h0, wx, wh, b):
    """Element-by-element GRU recurrence; no matrix ops."""
    T, B, d_in = x.shape
    d_h = h0.shape[1]
    sig = lambda v: 1.0 / (1.0 + math.exp(-v))
    h = np.zeros((T, B, d_h))
    for bidx in range(B):
        h_prev = [h0[bidx, j] for j in range(d_h)]
        for t in range(T):
            z, r, hbar, new_h = [0.0] * d_h, [0.0] * d_h, [0.0] * d_h, [0.0] * d_h
            for j in range(d_h):
                az = b[j] + sum(x[t, bidx, i] * wx[i, j] for i in range(d_in))
                az += sum(h_prev[k] * wh[k, j] for k in range(d_h))
                ar = b[d_h + j] + sum(x[t, bidx, i] * wx[i, d_h + j] for i in range(d_in))
                ar += sum(h_prev[k] * wh[k, d_h + j] for k in range(d_h))
                z[j], r[j] = sig(az), sig(ar)
            for j in range(d_h):
                ac = b[2 * d_h + j] + sum(x[t, bidx, i] * wx[i, 2 * d_h + j] for i in range(d_in))
                ac += sum(r[k] * h_prev[k] * wh[k, 2 * d_h + j] for k in range(d_h))
                hbar[j] = math.tanh(ac)
                new_h[j] = (1.0 - z[j]) * h_prev[j] + z[j] * hbar[j]
            for j in range(d_h):
                h[t, bidx, j] = new_h[j]
            h_prev = new_h
    return h


@pytest.mark.parametrize("name", kernels.available_backends())
class TestEachBackend:
    def test_forward_matches_scalar_oracle(self, name, rng):
        backend = kernels.get_backend(name)
        x, h0, wx, wh, b = random_instance(rng)
        h, _ = backend.gru_forward(x, h0, wx, wh, b)
        np.testing.assert_allclose(h, scalar_gru_oracle(x, h0, wx, wh, b), rtol=1e-12, atol=1e-13)

    def test_backward_matches_finite_differences(self, name, rng):
        backend = kernels.get_backend(name)
        x, h0, wx, wh, b = random_instance(rng, T=3, B=2, d_in=4, d_h=3)
        dh_out = rng.standard_normal((3, 2, 3))

        def objective():
            h, _ = backend.gru_forward(x, h0, wx, wh, b)
            return float((h * dh_out).sum())

        h, cache = backend.gru_forward(x, h0, wx, wh, b)
        dx, dwx, dwh, db, dh0 = backend.gru_backward(x, h0, wx, wh, b, h, cache, dh_out)
        eps = 1e-6
        for arr, grad in ((x, dx), (wx, dwx), (wh, dwh), (b, db), (h0, dh0)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                up = objective()
                arr[idx] = orig - eps
                down = objective()
                arr[idx] = orig
                num = (up - down) / (2 * eps)
                assert abs(grad[idx] - num) <= 1e-4 * max(1.0, abs(num))

    def test_repeat_call_bitwise_identical(self, name, rng):
        backend = kernels.get_backend(name)
        x, h0, wx, wh, b = random_instance(rng)
        h1, c1 = backend.gru_forward(x, h0, wx, wh, b)
        h2, c2 = backend.gru_forward(x, h0, wx, wh, b)
        np.testing.assert_array_equal(h1, h2)
        dh_out = rng.standard_normal(h1.shape)
        out1 = backend.gru_backward(x, h0, wx, wh, b, h1, c1, dh_out)
        out2 = backend.gru_backward(x, h0, wx, wh, b, h2, c2, dh_out)
        for a, b_ in zip(out1, out2):
            np.testing.assert_array_equal(a, b_)


@pytest.mark.skipif(
    "compiled" not in kernels.available_backends(), reason="extension not built"
)
class TestBackendParity:
    def test_forward_and_backward_agree(self, rng):
        compiled = kernels.get_backend("compiled")
        for _ in range(5):
            x, h0, wx, wh, b = random_instance(rng, T=8, B=5, d_in=9, d_h=6)
            h_ref, c_ref = reference.gru_forward(x, h0, wx, wh, b)
            h_cmp, c_cmp = compiled.gru_forward(x, h0, wx, wh, b)
            np.testing.assert_allclose(h_cmp, h_ref, rtol=1e-12, atol=1e-14)
            dh_out = rng.standard_normal(h_ref.shape)
            out_ref = reference.gru_backward(x, h0, wx, wh, b, h_ref, c_ref, dh_out)
            out_cmp = compiled.gru_backward(x, h0, wx, wh, b, h_cmp, c_cmp, dh_out)
            for a, c in zip(out_ref, out_cmp):
                np.testing.assert_allclose(c, a, rtol=1e-11, atol=1e-13)


def test_env_override_selects_backend(monkeypatch):
    monkeypatch.setenv("NEWSREC_BACKEND", "numpy")
    assert kernels.get_backend().NAME == "numpy"
    monkeypatch.delenv("NEWSREC_BACKEND")
    with pytest.raises(ValueError):
        kernels.get_backend("nonexistent")
