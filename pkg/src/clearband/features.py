"""Per-frame input features for the gain network.

42 values in fixed order: 22 band cepstral coefficients (orthonormal DCT-II
of the floored log band energies), first and second temporal differences of
the leading 6 coefficients, the first 6 DCT coefficients of the band pitch
correlation, the normalized pitch period, and a spectral non-stationarity
score. No cepstral mean normalization, and coefficient 0 is kept: the
network tracks absolute level on purpose.

The exact recipe is pinned by FEATURE_VERSION; models record it so an
engine never runs a model trained against different features.
"""

from __future__ import annotations

import numpy as np

from .config import FEATURE_SIZE, NUM_BANDS, PITCH_MAX_PERIOD

FEATURE_VERSION = 1

LOG_FLOOR = -8.0          # log10 energy floor; keeps silence finite
NUM_DELTA_COEFFS = 6
NUM_PITCH_COEFFS = 6


def _dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis as a matrix (M @ x == dct(x, norm='ortho'))."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.sqrt(2.0 / n) * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
    m[0] /= np.sqrt(2.0)
    return m


DCT_BANDS = _dct_matrix(NUM_BANDS)
DCT_BANDS.flags.writeable = False


def log_band_energies(energies: np.ndarray) -> np.ndarray:
    """log10 of band energies, floored at LOG_FLOOR."""
    return np.log10(np.maximum(np.asarray(energies, dtype=np.float64),
                               10.0 ** LOG_FLOOR))


def compute_bfcc(energies: np.ndarray) -> np.ndarray:
    """Band cepstrum: orthonormal DCT-II of the floored log energies."""
    return DCT_BANDS @ log_band_energies(energies)


def temporal_derivatives(prev1: np.ndarray, prev2: np.ndarray,
                         current: np.ndarray):
    """First and second differences of the leading 6 coefficients."""
    c, p1, p2 = (a[:NUM_DELTA_COEFFS] for a in (current, prev1, prev2))
    return c - p1, c - 2.0 * p1 + p2


def pitch_corr_dct(pitch_corr: np.ndarray) -> np.ndarray:
    """First 6 orthonormal DCT-II coefficients of the 22 band correlations."""
    return (DCT_BANDS @ np.asarray(pitch_corr, dtype=np.float64))[:NUM_PITCH_COEFFS]


def non_stationarity(prev_log_e: np.ndarray, log_e: np.ndarray) -> float:
    """Mean squared frame-to-frame log-energy change, squashed to [0, 1)."""
    d = log_e - prev_log_e
    m = float(np.mean(d * d))
    return m / (1.0 + m)


def assemble_features(bfcc, d_bfcc, dd_bfcc, pdct, pitch_period,
                      ns) -> np.ndarray:
    """Concatenate the feature blocks in their fixed order."""
    parts = (bfcc, d_bfcc, dd_bfcc, pdct)
    sizes = (NUM_BANDS, NUM_DELTA_COEFFS, NUM_DELTA_COEFFS, NUM_PITCH_COEFFS)
    for part, size in zip(parts, sizes):
        if np.shape(part) != (size,):
            raise ValueError(f"feature block of size {size} expected, "
                             f"got {np.shape(part)}")
    vec = np.concatenate([*parts,
                          [pitch_period / PITCH_MAX_PERIOD], [ns]])
    assert vec.shape == (FEATURE_SIZE,)
    return vec


def split_features(features: np.ndarray):
    """Inverse of assemble_features; returns the component blocks."""
    f = np.asarray(features)
    if f.shape != (FEATURE_SIZE,):
        raise ValueError(f"expected {FEATURE_SIZE} features")
    i0 = NUM_BANDS
    i1 = i0 + NUM_DELTA_COEFFS
    i2 = i1 + NUM_DELTA_COEFFS
    i3 = i2 + NUM_PITCH_COEFFS
    return (f[:i0], f[i0:i1], f[i1:i2], f[i2:i3],
            float(f[i3] * PITCH_MAX_PERIOD), float(f[i3 + 1]))


class FeatureExtractor:
    """Stateful per-stream feature pipeline (derivative + energy history).

    History starts at zero: the first frames difference against implicit
    all-zero predecessors.
    """

    def __init__(self):
        self.reset()

    def reset(self):
        self._prev1 = np.zeros(NUM_BANDS)
        self._prev2 = np.zeros(NUM_BANDS)
        self._prev_log_e = np.zeros(NUM_BANDS)

    def process(self, energies: np.ndarray, pitch_corr: np.ndarray,
                pitch_period: int) -> np.ndarray:
        log_e = log_band_energies(energies)
        bfcc = DCT_BANDS @ log_e
        d, dd = temporal_derivatives(self._prev1, self._prev2, bfcc)
        ns = non_stationarity(self._prev_log_e, log_e)
        self._prev2 = self._prev1
        self._prev1 = bfcc
        self._prev_log_e = log_e
        return assemble_features(bfcc, d, dd, pitch_corr_dct(pitch_corr),
                                 pitch_period, ns)
