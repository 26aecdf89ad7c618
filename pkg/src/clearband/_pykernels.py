"""Numpy implementations of the per-frame hot kernels.

Fallback backend; the compiled ``_ckernels`` module exposes the same
functions. Band weights are cached per edge table so accumulate/interpolate
become single matmuls.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

ACT_TANH = 0
ACT_SIGMOID = 1
ACT_RELU = 2

_band_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _band_weights(edges: np.ndarray, nbins: int):
    key = (edges.tobytes(), nbins)
    cached = _band_cache.get(key)
    if cached is None:
        nb = len(edges) - 1
        w = np.zeros((nb, nbins))
        for b in range(nb - 1):
            lo, hi = int(edges[b]), int(edges[b + 1])
            if hi > lo:
                frac = np.arange(hi - lo) / (hi - lo)
                w[b, lo:hi] += 1.0 - frac
                w[b + 1, lo:hi] += frac
        w[nb - 1, int(edges[nb - 1])] = 1.0
        cached = (w, w.T.copy())
        _band_cache[key] = cached
    return cached


def band_accumulate(edges, values):
    """E(b) = sum_k w_b(k) values[k]."""
    values = np.asarray(values, dtype=np.float64)
    w, _ = _band_weights(np.asarray(edges), len(values))
    return w @ values


def band_interpolate(edges, band_values, nbins, extend_last):
    """r(k) = sum_b w_b(k) v_b, optionally extending the last band upward."""
    band_values = np.asarray(band_values, dtype=np.float64)
    _, wt = _band_weights(np.asarray(edges), nbins)
    out = wt @ band_values
    if extend_last:
        out[int(edges[-1]) + 1:] = band_values[-1]
    return out


def _activate(v, activation):
    if activation == ACT_TANH:
        return np.tanh(v)
    if activation == ACT_SIGMOID:
        with np.errstate(over="ignore"):
            return (1.0 / (1.0 + np.exp(-v))).astype(np.float32)
    if activation == ACT_RELU:
        return np.maximum(v, np.float32(0.0))
    raise ValueError(f"unknown activation code {activation}")


def dense_forward(w, b, x, activation):
    """activation(W x + b), float32 arithmetic."""
    return _activate(w @ x + b, activation)


def _sigmoid(v):
    with np.errstate(over="ignore"):
        return (1.0 / (1.0 + np.exp(-v))).astype(np.float32)


def gru_step(wz, wr, wc, uz, ur, uc, bz, br, bc, h, x, activation):
    """One recurrent step; returns the new hidden state.

    z = sig(Wz x + Uz h + bz); r = sig(Wr x + Ur h + br)
    c = act(Wc x + Uc (r*h) + bc); h' = z*h + (1-z)*c
    """
    z = _sigmoid(wz @ x + uz @ h + bz)
    r = _sigmoid(wr @ x + ur @ h + br)
    c = _activate(wc @ x + uc @ (r * h) + bc, activation)
    return z * h + (np.float32(1.0) - z) * c


def pitch_corr_scan(sig, frame_len, min_lag, max_lag):
    """Normalized cross-correlation of the trailing frame against its own
    lagged history, for every lag in [min_lag, max_lag]."""
    sig = np.asarray(sig, dtype=np.float64)
    n = len(sig)
    if n < frame_len + max_lag:
        raise ValueError("signal too short for requested lag range")
    frame = sig[n - frame_len:]
    e_frame = float(frame @ frame)

    lags = np.arange(min_lag, max_lag + 1)
    starts = n - frame_len - lags
    windows = np.lib.stride_tricks.sliding_window_view(sig, frame_len)
    segs = windows[starts]
    nums = segs @ frame
    energies = np.einsum("ij,ij->i", segs, segs)

    denom = np.sqrt(e_frame * energies)
    corr = np.zeros(len(lags))
    ok = denom > 1e-12
    corr[ok] = nums[ok] / denom[ok]
    return corr
