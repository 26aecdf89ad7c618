"""Triangular critical-band layout, band energies, and gain interpolation.

22 bands approximate the Bark scale the way the Opus codec does: Bark-like
spacing at high frequencies, never narrower than 4 DFT bins (200 Hz) at the
bottom. Triangles peak at the band boundaries and form a partition of unity
over bins 0..400 (0-20 kHz); bins above 20 kHz carry no band energy and, on
synthesis, inherit the last band's gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import DEFAULT_CONFIG, NUM_BANDS, SILENCE_ENERGY, FrameConfig

# Triangle peak frequencies in Hz; 50 Hz bins at 48 kHz / N=960 map these
# to bins 0, 4, 8, ..., 312, 400.
BAND_PEAK_HZ = (
    0, 200, 400, 600, 800, 1000, 1200, 1400, 1600, 2000, 2400,
    2800, 3200, 4000, 4800, 5600, 6800, 8000, 9600, 12000, 15600, 20000,
)


@dataclass(frozen=True)
class BandLayout:
    """22 triangular bands over the half spectrum.

    ``edges`` holds 23 bin indices: the 22 triangle peaks plus a final
    entry closing the last band at 20 kHz. ``weights[b, k]`` is the
    amplitude of band ``b`` at bin ``k``.
    """

    edges: np.ndarray
    weights: np.ndarray
    band_count: int = NUM_BANDS
    spectrum_bins: int = field(default=DEFAULT_CONFIG.spectrum_bins)

    @property
    def covered_bins(self) -> int:
        """Number of bins covered by the band structure (0..last edge)."""
        return int(self.edges[-1]) + 1


def build_layout(config: FrameConfig = DEFAULT_CONFIG) -> BandLayout:
    """Construct the band layout for the 48 kHz / N=960 configuration."""
    if (config.sample_rate, config.window_size) != (48000, 960):
        raise ValueError("band layout is defined for 48 kHz with 960-sample windows")
    bin_hz = config.sample_rate / config.window_size
    peaks = np.asarray(np.round(np.asarray(BAND_PEAK_HZ) / bin_hz), dtype=np.int32)
    edges = np.concatenate([peaks, peaks[-1:]]).astype(np.int32)
    edges.flags.writeable = False

    nbins = config.spectrum_bins
    weights = np.zeros((NUM_BANDS, nbins))
    for b in range(NUM_BANDS - 1):
        lo, hi = int(peaks[b]), int(peaks[b + 1])
        frac = np.arange(hi - lo) / (hi - lo)
        weights[b, lo:hi] += 1.0 - frac
        weights[b + 1, lo:hi] += frac
    weights[NUM_BANDS - 1, int(peaks[-1])] = 1.0
    weights.flags.writeable = False
    return BandLayout(edges=edges, weights=weights, spectrum_bins=nbins)


def band_energies(layout: BandLayout, spectrum: np.ndarray,
                  backend=None) -> np.ndarray:
    """Per-band energy E(b) = sum_k w_b(k) |X(k)|^2."""
    power = np.abs(np.asarray(spectrum)) ** 2
    return _kernels.get(backend).band_accumulate(layout.edges, power)


def band_accumulate(layout: BandLayout, values: np.ndarray,
                    backend=None) -> np.ndarray:
    """sum_k w_b(k) values[k] for arbitrary real per-bin values."""
    return _kernels.get(backend).band_accumulate(
        layout.edges, np.asarray(values, dtype=np.float64))


def ideal_gains(clean_e: np.ndarray, noisy_e: np.ndarray,
                silence_threshold: float = SILENCE_ENERGY):
    """Oracle band gains sqrt(E_clean/E_noisy) clamped to [0, 1].

    Returns ``(gains, defined)``: a gain is undefined (mask False) when both
    energies sit below the silence threshold, e.g. digital silence or bands
    emptied by low-pass filtering. Undefined entries are returned as 1
    (leave-alone) but carry no meaning.
    """
    clean_e = np.asarray(clean_e, dtype=np.float64)
    noisy_e = np.asarray(noisy_e, dtype=np.float64)
    defined = (clean_e > silence_threshold) | (noisy_e > silence_threshold)
    gains = np.sqrt(clean_e / np.maximum(noisy_e, 1e-15))
    np.clip(gains, 0.0, 1.0, out=gains)
    gains[~defined] = 1.0
    return gains, defined


def interpolate_gains(layout: BandLayout, gains: np.ndarray,
                      extend_last: bool = True, backend=None) -> np.ndarray:
    """Per-bin gain r(k) = sum_b w_b(k) g_b.

    With ``extend_last``, bins above the last band edge (20-24 kHz) take the
    last band's value instead of zero so full-band output stays defined.
    """
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (layout.band_count,):
        raise ValueError(f"expected {layout.band_count} gains")
    return _kernels.get(backend).band_interpolate(
        layout.edges, gains, layout.spectrum_bins, extend_last)
