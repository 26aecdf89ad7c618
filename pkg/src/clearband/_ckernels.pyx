# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-frame hot kernels; mirrors clearband._pykernels."""

from libc.math cimport exp, expf, sqrt, tanhf

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"

ACT_TANH = 0
ACT_SIGMOID = 1
ACT_RELU = 2


def band_accumulate(edges, values):
    """E(b) = sum_k w_b(k) values[k]."""
    cdef const cnp.int32_t[::1] e = np.ascontiguousarray(edges, dtype=np.int32)
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef int nb = e.shape[0] - 1
    out_arr = np.zeros(nb)
    cdef double[::1] out = out_arr
    cdef int b, k, lo, hi
    cdef double frac, width, val
    for b in range(nb - 1):
        lo = e[b]
        hi = e[b + 1]
        if hi <= lo:
            continue
        width = hi - lo
        for k in range(lo, hi):
            val = v[k]
            frac = (k - lo) / width
            out[b] += (1.0 - frac) * val
            out[b + 1] += frac * val
    out[nb - 1] += v[e[nb - 1]]
    return out_arr


def band_interpolate(edges, band_values, nbins, extend_last):
    """r(k) = sum_b w_b(k) v_b, optionally extending the last band upward."""
    cdef const cnp.int32_t[::1] e = np.ascontiguousarray(edges, dtype=np.int32)
    cdef const double[::1] v = np.ascontiguousarray(band_values, dtype=np.float64)
    cdef int nb = e.shape[0] - 1
    cdef int n = nbins
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef int b, k, lo, hi
    cdef double frac, width
    cdef bint ext = extend_last
    for b in range(nb - 1):
        lo = e[b]
        hi = e[b + 1]
        if hi <= lo:
            continue
        width = hi - lo
        for k in range(lo, hi):
            frac = (k - lo) / width
            out[k] = (1.0 - frac) * v[b] + frac * v[b + 1]
    out[e[nb - 1]] = v[nb - 1]
    if ext:
        for k in range(e[nb] + 1, n):
            out[k] = v[nb - 1]
    return out_arr


cdef inline float _sigmoid(float x) nogil:
    return <float>(1.0 / (1.0 + expf(-x)))


cdef inline float _activate(float x, int activation) nogil:
    if activation == 0:
        return tanhf(x)
    if activation == 1:
        return _sigmoid(x)
    return x if x > 0.0 else 0.0


cdef void _matvec(const float[:, ::1] w, const float[::1] x,
                  float[::1] out, bint accumulate) nogil:
    cdef int i, j
    cdef float acc
    for i in range(w.shape[0]):
        acc = out[i] if accumulate else 0.0
        for j in range(w.shape[1]):
            acc += w[i, j] * x[j]
        out[i] = acc


def dense_forward(w, b, x, int activation):
    """activation(W x + b), float32 arithmetic."""
    cdef const float[:, ::1] wv = w
    cdef const float[::1] bv = b
    cdef const float[::1] xv = x
    if activation not in (0, 1, 2):
        raise ValueError(f"unknown activation code {activation}")
    out_arr = np.empty(wv.shape[0], dtype=np.float32)
    cdef float[::1] out = out_arr
    cdef int i
    with nogil:
        _matvec(wv, xv, out, False)
        for i in range(out.shape[0]):
            out[i] = _activate(out[i] + bv[i], activation)
    return out_arr


def gru_step(wz, wr, wc, uz, ur, uc, bz, br, bc, h, x, int activation):
    """One recurrent step; returns the new hidden state."""
    cdef const float[:, ::1] wzv = wz, wrv = wr, wcv = wc
    cdef const float[:, ::1] uzv = uz, urv = ur, ucv = uc
    cdef const float[::1] bzv = bz, brv = br, bcv = bc
    cdef const float[::1] hv = h
    cdef const float[::1] xv = x
    if activation not in (0, 1, 2):
        raise ValueError(f"unknown activation code {activation}")
    cdef int n = hv.shape[0]
    out_arr = np.empty(n, dtype=np.float32)
    cdef float[::1] out = out_arr
    z_arr = np.empty(n, dtype=np.float32)
    r_arr = np.empty(n, dtype=np.float32)
    c_arr = np.empty(n, dtype=np.float32)
    cdef float[::1] zv = z_arr, rv = r_arr, cv = c_arr
    cdef int i
    with nogil:
        _matvec(wzv, xv, zv, False)
        _matvec(uzv, hv, zv, True)
        _matvec(wrv, xv, rv, False)
        _matvec(urv, hv, rv, True)
        for i in range(n):
            zv[i] = _sigmoid(zv[i] + bzv[i])
            rv[i] = _sigmoid(rv[i] + brv[i]) * hv[i]
        _matvec(wcv, xv, cv, False)
        _matvec(ucv, rv, cv, True)
        for i in range(n):
            cv[i] = _activate(cv[i] + bcv[i], activation)
            out[i] = zv[i] * hv[i] + (1.0 - zv[i]) * cv[i]
    return out_arr


def pitch_corr_scan(sig, int frame_len, int min_lag, int max_lag):
    """Normalized cross-correlation of the trailing frame against its own
    lagged history, for every lag in [min_lag, max_lag]."""
    cdef const double[::1] s = np.ascontiguousarray(sig, dtype=np.float64)
    cdef int n = s.shape[0]
    if n < frame_len + max_lag:
        raise ValueError("signal too short for requested lag range")
    cdef int nlags = max_lag - min_lag + 1
    out_arr = np.zeros(nlags)
    cdef double[::1] out = out_arr
    cdef int lag, i, start
    cdef double e_frame = 0.0, e_seg, num, denom
    cdef int f0 = n - frame_len
    with nogil:
        for i in range(frame_len):
            e_frame += s[f0 + i] * s[f0 + i]
        for lag in range(min_lag, max_lag + 1):
            start = f0 - lag
            num = 0.0
            e_seg = 0.0
            for i in range(frame_len):
                num += s[start + i] * s[f0 + i]
                e_seg += s[start + i] * s[start + i]
            denom = sqrt(e_frame * e_seg)
            if denom > 1e-12:
                out[lag - min_lag] = num / denom
    return out_arr
