"""Windowed analysis/synthesis with 50% overlap-add.

The same window is applied at analysis and at synthesis, so reconstruction
relies on w^2(n) + w^2(n + N/2) = 1 (Princen-Bradley). Forward DFT is
unnormalized; the inverse carries the 1/N factor.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .config import DEFAULT_CONFIG, FrameConfig


def vorbis_window(n: int, window_size: int) -> float:
    """Window coefficient sin[(pi/2) sin^2(pi n / N)] for sample ``n``."""
    assert 0 <= n < window_size, "window index out of range"
    s = math.sin(math.pi * n / window_size)
    return math.sin(0.5 * math.pi * s * s)


@lru_cache(maxsize=4)
def window_array(window_size: int) -> np.ndarray:
    """Full window as a read-only float64 array."""
    n = np.arange(window_size)
    s = np.sin(np.pi * n / window_size)
    w = np.sin(0.5 * np.pi * s * s)
    w.flags.writeable = False
    return w


class OverlapState:
    """Per-stream analysis/synthesis state.

    Holds the previous input hop (analysis) and the pending windowed tail
    (synthesis). Single-stream: mutate sequentially, never share.
    """

    def __init__(self, config: FrameConfig = DEFAULT_CONFIG):
        self.config = config
        self._window = window_array(config.window_size)
        self.reset()

    def reset(self):
        self.input_buffer = np.zeros(self.config.hop)
        self.synthesis_overlap = np.zeros(self.config.hop)

    def analyze(self, hop_in: np.ndarray) -> np.ndarray:
        """Windowed DFT of [previous hop, new hop]; returns N/2+1 bins."""
        hop_in = np.asarray(hop_in, dtype=np.float64)
        if hop_in.shape != (self.config.hop,):
            raise ValueError(
                f"expected {self.config.hop} samples, got {hop_in.shape}")
        frame = np.concatenate([self.input_buffer, hop_in])
        self.input_buffer = hop_in.copy()
        return np.fft.rfft(frame * self._window)

    def synthesize(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse DFT, second windowing, overlap-add; returns one hop."""
        spectrum = np.asarray(spectrum)
        if spectrum.shape != (self.config.spectrum_bins,):
            raise ValueError(
                f"expected {self.config.spectrum_bins} bins, got {spectrum.shape}")
        frame = np.fft.irfft(spectrum, n=self.config.window_size) * self._window
        hop = self.config.hop
        out = frame[:hop] + self.synthesis_overlap
        self.synthesis_overlap = frame[hop:].copy()
        return out
