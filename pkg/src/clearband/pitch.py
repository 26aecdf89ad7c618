"""Pitch tracking and frequency-domain comb filtering.

The comb filter adds a pitch-period-delayed copy of the signal to reinforce
harmonics and cancel inter-harmonic noise, with a per-band strength derived
from the band pitch correlation and the band gain, then restores every
band's original energy.

Only the FIR comb (X + alpha*P) is implemented. A recursive variant
P from H(z) = 1/(1 - beta z^-T) would deepen the inter-harmonic nulls at
the cost of added distortion; it is documented here as a possible extension
and deliberately not built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import _kernels
from .bands import BandLayout
from .config import (DEFAULT_CONFIG, FrameConfig, PITCH_DOWNSAMPLE,
                     PITCH_MAX_PERIOD, PITCH_MIN_PERIOD)
from .dsp import window_array

# When several correlation peaks are within this tolerance of the maximum
# (a periodic signal correlates equally at T, 2T, ...), prefer the smallest
# lag, i.e. the fundamental.
PEAK_TOLERANCE = 0.1

_DECIM_TAPS = 31
_decim_fir = scipy.signal.firwin(_DECIM_TAPS, 5000.0, fs=48000.0)


class PitchState:
    """Rolling 48 kHz history for the pitch search, one per stream."""

    def __init__(self, config: FrameConfig = DEFAULT_CONFIG,
                 min_period: int = PITCH_MIN_PERIOD,
                 max_period: int = PITCH_MAX_PERIOD):
        self.config = config
        self.min_period = min_period
        self.max_period = max_period
        # window + max lag, rounded up to whole hops for the ring update;
        # extra headroom absorbs the decimation filter's edge loss.
        need = config.window_size + max_period + _DECIM_TAPS
        self.history_len = ((need + config.hop - 1) // config.hop) * config.hop
        self.current_period = min_period
        self.reset()

    def reset(self):
        self.history = np.zeros(self.history_len)
        self.current_period = self.min_period

    def push(self, hop_in: np.ndarray):
        hop = self.config.hop
        self.history[:-hop] = self.history[hop:]
        self.history[-hop:] = hop_in


def _local_peak_lags(corr: np.ndarray, min_lag: int) -> np.ndarray:
    """Lags whose correlation is a local maximum (plateaus/endpoints count)."""
    left = np.empty_like(corr)
    right = np.empty_like(corr)
    left[0] = -np.inf
    left[1:] = corr[:-1]
    right[-1] = -np.inf
    right[:-1] = corr[1:]
    mask = (corr >= left) & (corr >= right)
    return np.nonzero(mask)[0] + min_lag


def _pick_peak(corr: np.ndarray, min_lag: int, tolerance: float) -> int:
    """Smallest lag among local maxima within ``tolerance`` of the best."""
    best = float(corr.max())
    peaks = _local_peak_lags(corr, min_lag)
    keep = peaks[corr[peaks - min_lag] >= best - tolerance]
    return int(keep[0])


def find_pitch(state: PitchState, backend=None) -> int:
    """Pitch period in samples for the current frame.

    Coarse normalized-correlation search at 12 kHz (decimate by 4 after a
    5 kHz low-pass), then exhaustive refinement at 48 kHz around the coarse
    peak. Always returns a lag in [min_period, max_period]; unvoiced input
    simply yields a low downstream correlation.
    """
    k = _kernels.get(backend)
    frame_len = state.config.window_size

    low = np.convolve(state.history, _decim_fir, mode="valid")
    dec = low[::PITCH_DOWNSAMPLE]
    d_frame = frame_len // PITCH_DOWNSAMPLE
    d_min = state.min_period // PITCH_DOWNSAMPLE
    d_max = state.max_period // PITCH_DOWNSAMPLE
    corr = k.pitch_corr_scan(dec, d_frame, d_min, d_max)
    if corr.max() < 1e-9:
        state.current_period = state.min_period
        return state.current_period
    coarse = _pick_peak(corr, d_min, PEAK_TOLERANCE) * PITCH_DOWNSAMPLE

    # Local 48 kHz refinement; slide the +-4 window while the maximum sits
    # on its edge so a one-step coarse error cannot strand the search.
    lo = max(state.min_period, coarse - 4)
    hi = min(state.max_period, coarse + 4)
    for _ in range(8):
        fine = k.pitch_corr_scan(state.history, frame_len, lo, hi)
        best = lo + int(np.argmax(fine))
        if best == lo and lo > state.min_period:
            lo = max(state.min_period, lo - 4)
            hi = best
        elif best == hi and hi < state.max_period:
            lo = best
            hi = min(state.max_period, hi + 4)
        else:
            break
    state.current_period = best
    return best


def pitch_spectrum(state: PitchState, period: int) -> np.ndarray:
    """Windowed DFT of the input delayed by ``period`` samples, taken at the
    current frame's window position."""
    n = state.config.window_size
    if not 0 <= period <= len(state.history) - n:
        raise ValueError(f"period {period} outside usable history")
    end = len(state.history) - period
    segment = state.history[end - n:end]
    return np.fft.rfft(segment * window_array(n))


def band_pitch_correlation(spectrum: np.ndarray, pitch_spec: np.ndarray,
                           layout: BandLayout, backend=None) -> np.ndarray:
    """Per-band normalized correlation between X and the pitch-delayed P.

    For lags shorter than the window the two analysis windows overlap in
    time, which biases narrow low bands upward even on unvoiced input
    (the cos(2*pi*k*T/N) cross term only averages out across wide bands).
    """
    k = _kernels.get(backend)
    cross = k.band_accumulate(
        layout.edges, np.real(spectrum * np.conj(pitch_spec)))
    e_x = k.band_accumulate(layout.edges, np.abs(spectrum) ** 2)
    e_p = k.band_accumulate(layout.edges, np.abs(pitch_spec) ** 2)
    corr = np.zeros(layout.band_count)
    ok = (e_x > 1e-15) & (e_p > 1e-15)
    corr[ok] = cross[ok] / np.sqrt(e_x[ok] * e_p[ok])
    return np.clip(corr, -1.0, 1.0)


def filter_strength(pitch_corr, gain):
    """Comb strength alpha(p, g) = min(sqrt(p^2(1-g^2) / ((1-p^2)g^2)), 1).

    Boundary rules, in precedence order: g=1 leaves the signal untouched
    (alpha 0); p<=0 means nothing to enhance (alpha 0, negative correlation
    is clamped rather than anti-enhanced); p>=g saturates to 1.
    """
    p = np.clip(np.asarray(pitch_corr, dtype=np.float64), 0.0, 1.0)
    g = np.clip(np.asarray(gain, dtype=np.float64), 0.0, 1.0)
    p, g = np.broadcast_arrays(p, g)
    alpha = np.zeros(p.shape)
    interior = (g < 1.0) & (p > 0.0)
    saturated = interior & (p >= g)
    alpha[saturated] = 1.0
    mid = interior & ~saturated
    pm, gm = p[mid], g[mid]
    ratio = (pm * pm) * (1.0 - gm * gm) / ((1.0 - pm * pm) * (gm * gm))
    alpha[mid] = np.minimum(np.sqrt(ratio), 1.0)
    if alpha.ndim == 0:
        return float(alpha)
    return alpha


@dataclass
class CombFilterPlan:
    """Per-band comb strengths plus the pitch-delayed spectrum they weight."""

    alpha: np.ndarray
    pitch_spec: np.ndarray


def apply_comb_filter(spectrum: np.ndarray, plan: CombFilterPlan,
                      layout: BandLayout, original_energies: np.ndarray,
                      backend=None) -> np.ndarray:
    """X + alpha(k) P, renormalized so every band keeps its original energy.

    Renormalization multiplies the filtered spectrum by a nonnegative
    per-bin amplitude. Preferred path: a per-band power scale interpolated
    with the band weights (rho(k) = sum_b w_b(k) u_b), with u solved from
    the tridiagonal system M u = E_orig, M_bc = sum_k w_b w_c |X_f|^2 -
    smooth and exact when the solution is nonnegative. When it is not (the
    overlapping triangles can demand a negative power scale), a repair path
    caps the shared-bin contributions and sets each band's exclusive peak
    bin to absorb the residual exactly. Bands with no filtered energy are
    left untouched (scale 1).
    """
    k = _kernels.get(backend)
    alpha = np.asarray(plan.alpha, dtype=np.float64)
    if np.all(alpha == 0.0):
        return np.array(spectrum, copy=True)
    alpha_bins = k.band_interpolate(
        layout.edges, alpha, layout.spectrum_bins, True)
    filtered = spectrum + alpha_bins * plan.pitch_spec

    power = np.abs(filtered) ** 2
    w = layout.weights
    e_filt = w @ power
    target = np.asarray(original_energies, dtype=np.float64)
    active = e_filt > max(1e-30, 1e-14 * float(e_filt.max(initial=0.0)))

    u = np.ones(layout.band_count)
    sol = None
    if active.any():
        m = (w * power) @ w.T
        ma = m[np.ix_(active, active)]
        rhs = target[active] - m[np.ix_(active, ~active)] @ u[~active]
        try:
            cand = np.linalg.solve(ma, rhs)
            if np.all(np.isfinite(cand)) and np.all(cand >= 0.0):
                sol = cand
        except np.linalg.LinAlgError:
            sol = None
    if sol is not None:
        u[active] = sol
        rho = k.band_interpolate(layout.edges, u, layout.spectrum_bins, True)
        return filtered * np.sqrt(np.maximum(rho, 0.0))
    return _renormalize_with_peak_repair(filtered, layout, target, e_filt,
                                         active, backend=k)


def _renormalize_with_peak_repair(filtered, layout, target, e_filt, active,
                                  backend):
    """Exact band-energy restoration that stays feasible.

    Start from the one-shot interpolated ratio scale, then (a) scale down
    interval interiors until no band's shared-bin energy exceeds its
    target, and (b) set each band's peak bin - which no other band weights
    - so the band total lands exactly on target.
    """
    nb = layout.band_count
    peaks = np.asarray(layout.edges[:nb], dtype=np.intp)
    w = layout.weights

    u0 = np.where(active, target / np.maximum(e_filt, 1e-30), 1.0)
    rho = backend.band_interpolate(layout.edges, u0, layout.spectrum_bins, True)
    out = filtered * np.sqrt(np.maximum(rho, 0.0))

    q = np.abs(out) ** 2
    q_shared = q.copy()
    q_shared[peaks] = 0.0

    # cap loop: shrinking an interval only ever lowers band energies, so
    # fixing the worst violator converges in at most one pass per band
    for _ in range(nb + 1):
        shared = w @ q_shared
        over = np.nonzero(active & (shared > target * (1.0 + 1e-12)))[0]
        if len(over) == 0:
            break
        b = over[np.argmax(shared[over] - target[over])]
        f = target[b] / shared[b] if shared[b] > 0 else 0.0
        lo = layout.edges[b - 1] if b > 0 else layout.edges[0]
        hi = layout.edges[b + 1]
        seg = np.arange(lo, hi + 1)
        seg = seg[~np.isin(seg, peaks)]
        out[seg] *= np.sqrt(f)
        q_shared[seg] *= f

    shared = w @ q_shared
    for b in np.nonzero(active)[0]:
        need = max(target[b] - shared[b], 0.0)
        cur = abs(out[peaks[b]]) ** 2
        if cur > 0.0:
            out[peaks[b]] *= np.sqrt(need / cur)
        elif need > 0.0:
            base = filtered[peaks[b]]
            phase = base / abs(base) if base != 0 else 1.0
            out[peaks[b]] = phase * np.sqrt(need)
    return out
