"""Ground-truth targets: per-frame oracle gains, defined masks, VAD labels.

Features come from the engine's own analyzer (same code path as inference),
so trained models see exactly the inputs the engine will produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from clearband import FrameAnalyzer, OverlapState, band_energies, ideal_gains
from clearband.config import HOP_SIZE, NUM_BANDS

VAD_THRESHOLD_DB = 40.0   # speech if the frame is within 40 dB of the peak
VAD_HANGOVER = 10         # frames of label extension after active speech


@dataclass
class TrainingExample:
    features: np.ndarray    # (frames, 42) float32
    gains: np.ndarray       # (frames, 22) float32, 0 where undefined
    mask: np.ndarray        # (frames, 22) bool, False = undefined
    vad: np.ndarray         # (frames,) float32 in {0, 1}


def vad_labels(clean: np.ndarray, n_frames: int,
               hangover: int = VAD_HANGOVER) -> np.ndarray:
    """Frame labels from clean-speech energy with a decay hangover."""
    energies = np.zeros(n_frames)
    for i in range(n_frames):
        lo = max((i - 1) * HOP_SIZE, 0)
        frame = clean[lo:(i + 1) * HOP_SIZE]
        energies[i] = float(np.sum(frame ** 2))
    peak = energies.max(initial=0.0)
    if peak <= 0.0:
        return np.zeros(n_frames, dtype=np.float32)
    raw = energies > peak * 10.0 ** (-VAD_THRESHOLD_DB / 10.0)
    labels = np.zeros(n_frames, dtype=np.float32)
    countdown = 0
    for i in range(n_frames):
        if raw[i]:
            countdown = hangover + 1
        if countdown > 0:
            labels[i] = 1.0
            countdown -= 1
    return labels


def build_example(clean: np.ndarray, noisy: np.ndarray) -> TrainingExample:
    """Featurize the noisy signal and derive aligned per-frame targets."""
    if len(clean) != len(noisy):
        raise ValueError("clean/noisy pair must be aligned sample-for-sample")
    analyzer = FrameAnalyzer()
    clean_overlap = OverlapState()
    layout = analyzer.layout
    n_frames = len(noisy) // HOP_SIZE

    features = np.empty((n_frames, 42), dtype=np.float32)
    gains = np.empty((n_frames, NUM_BANDS), dtype=np.float32)
    mask = np.empty((n_frames, NUM_BANDS), dtype=bool)
    for i in range(n_frames):
        sl = slice(i * HOP_SIZE, (i + 1) * HOP_SIZE)
        analysis = analyzer.push(noisy[sl])
        e_clean = band_energies(layout, clean_overlap.analyze(clean[sl]))
        g, defined = ideal_gains(e_clean, analysis.band_energy)
        features[i] = analysis.features
        gains[i] = np.where(defined, g, 0.0)
        mask[i] = defined
    return TrainingExample(features=features, gains=gains, mask=mask,
                           vad=vad_labels(clean, n_frames))
