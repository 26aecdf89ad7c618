"""Streaming analysis front end shared by the denoiser and the trainer.

Per 10 ms hop: windowed spectrum, band energies, pitch track, band pitch
correlation, and the 42 network features.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bands import BandLayout, build_layout
from .config import DEFAULT_CONFIG, FrameConfig
from .dsp import OverlapState
from .features import FeatureExtractor
from .pitch import PitchState, band_pitch_correlation, find_pitch, pitch_spectrum


@dataclass
class FrameAnalysis:
    spectrum: np.ndarray        # complex half spectrum of the current frame
    band_energy: np.ndarray     # 22 band energies of the noisy input
    pitch_period: int
    pitch_spec: np.ndarray      # spectrum of the pitch-delayed input
    pitch_corr: np.ndarray      # 22 band correlations
    features: np.ndarray        # 42 network inputs


class FrameAnalyzer:
    """Stateful per-stream analyzer; call push() once per hop."""

    def __init__(self, config: FrameConfig = DEFAULT_CONFIG,
                 layout: BandLayout | None = None, backend=None):
        self.config = config
        self.layout = layout if layout is not None else build_layout(config)
        self.kernels = _kernels.get(backend)
        self.overlap = OverlapState(config)
        self.pitch = PitchState(config)
        self.extractor = FeatureExtractor()
        self.timings = None

    def reset(self):
        self.overlap.reset()
        self.pitch.reset()
        self.extractor.reset()

    def push(self, hop_in: np.ndarray) -> FrameAnalysis:
        t = self.timings
        k = self.kernels

        start = time.perf_counter() if t is not None else 0.0
        spectrum = self.overlap.analyze(hop_in)
        if t is not None:
            now = time.perf_counter()
            t["fft"] += now - start
            start = now
        energy = k.band_accumulate(self.layout.edges, np.abs(spectrum) ** 2)
        if t is not None:
            now = time.perf_counter()
            t["bands"] += now - start
            start = now

        self.pitch.push(np.asarray(hop_in, dtype=np.float64))
        period = find_pitch(self.pitch, backend=k)
        p_spec = pitch_spectrum(self.pitch, period)
        p_corr = band_pitch_correlation(spectrum, p_spec, self.layout, backend=k)
        if t is not None:
            now = time.perf_counter()
            t["pitch"] += now - start
            start = now

        features = self.extractor.process(energy, p_corr, period)
        if t is not None:
            t["features"] += time.perf_counter() - start

        return FrameAnalysis(spectrum=spectrum, band_energy=energy,
                             pitch_period=period, pitch_spec=p_spec,
                             pitch_corr=p_corr, features=features)
