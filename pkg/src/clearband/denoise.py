"""Per-frame denoising pipeline.

Chain per 10 ms hop: analyze -> band energies -> pitch -> features ->
network gains -> gain decay limiting -> comb filter -> interpolated gain
multiplication -> overlap-add synthesis. Output lags input by exactly one
hop. An oracle path accepts externally supplied gains in place of the
network for testing and tuning.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analysis import FrameAnalyzer
from .config import DEFAULT_CONFIG, NUM_BANDS, FrameConfig
from .nn import Model, NetworkState, network_forward
from .pitch import CombFilterPlan, apply_comb_filter, filter_strength

# Per-frame floor on gain decay; keeps a minimum reverberation tail
# (~135 ms equivalent) so suppressed speech does not sound overly dry.
GAIN_DECAY = 0.6

_STAGES = ("fft", "bands", "pitch", "features", "network", "comb", "gains")


def smooth_gains(prev: np.ndarray, new: np.ndarray,
                 decay: float = GAIN_DECAY) -> np.ndarray:
    """max(decay * previous, new): rising gains pass, decay is limited."""
    return np.maximum(decay * np.asarray(prev, dtype=np.float64),
                      np.asarray(new, dtype=np.float64))


@dataclass
class FrameResult:
    audio: np.ndarray           # one hop of output, one hop late
    vad: float                  # voice probability (0.0 without a model)
    gains: np.ndarray           # the 22 gains actually applied


class Denoiser:
    """One streaming denoiser instance per audio channel.

    ``model`` may be None for the oracle/passthrough paths. States are
    strictly sequential; distinct instances are independent and the shared
    Model is read-only.
    """

    def __init__(self, model: Model | None = None, *,
                 comb_filter: bool = True, gain_smoothing: bool = True,
                 extend_top_gain: bool = True,
                 config: FrameConfig = DEFAULT_CONFIG,
                 backend=None, collect_timing: bool = False):
        self.model = model
        self.comb_filter = comb_filter
        self.gain_smoothing = gain_smoothing
        self.extend_top_gain = extend_top_gain
        self.config = config
        self.kernels = _kernels.get(backend)
        self.analyzer = FrameAnalyzer(config, backend=self.kernels)
        self.layout = self.analyzer.layout
        self.net_state = NetworkState()
        self.prev_gains = np.zeros(NUM_BANDS)
        self.timings = {s: 0.0 for s in _STAGES} if collect_timing else None
        self.frames_processed = 0
        if collect_timing:
            self.analyzer.timings = self.timings

    def reset(self):
        self.analyzer.reset()
        self.net_state.reset()
        self.prev_gains = np.zeros(NUM_BANDS)
        self.frames_processed = 0

    def process(self, hop_in: np.ndarray) -> FrameResult:
        """Denoise one hop with the loaded model."""
        if self.model is None:
            raise ValueError("no model loaded; use process_with_gains()")
        return self._run(hop_in, gains=None, smooth=self.gain_smoothing)

    def process_with_gains(self, hop_in: np.ndarray, gains: np.ndarray,
                           smooth: bool | None = None) -> FrameResult:
        """Run the pipeline with supplied band gains (network bypassed)."""
        gains = np.asarray(gains, dtype=np.float64)
        if gains.shape != (NUM_BANDS,):
            raise ValueError(f"expected {NUM_BANDS} gains")
        if np.any(gains < 0.0) or np.any(gains > 1.0):
            raise ValueError("gains must lie in [0, 1]")
        if smooth is None:
            smooth = self.gain_smoothing
        return self._run(hop_in, gains=gains, smooth=smooth)

    def _run(self, hop_in, gains, smooth) -> FrameResult:
        hop_in = np.asarray(hop_in, dtype=np.float64)
        if hop_in.shape != (self.config.hop,):
            raise ValueError(f"expected one hop of {self.config.hop} samples")
        if not np.all(np.isfinite(hop_in)):
            raise ValueError("input contains NaN or Inf")
        t = self.timings

        analysis = self.analyzer.push(hop_in)

        start = time.perf_counter() if t is not None else 0.0
        if gains is None:
            gains, vad = network_forward(self.model, self.net_state,
                                         analysis.features, self.kernels)
        else:
            vad = 0.0
        if t is not None:
            now = time.perf_counter()
            t["network"] += now - start
            start = now

        if smooth:
            gains = smooth_gains(self.prev_gains, gains)
        self.prev_gains = gains

        spectrum = analysis.spectrum
        if self.comb_filter:
            alpha = filter_strength(analysis.pitch_corr, gains)
            plan = CombFilterPlan(alpha=alpha, pitch_spec=analysis.pitch_spec)
            spectrum = apply_comb_filter(spectrum, plan, self.layout,
                                         analysis.band_energy, self.kernels)
        if t is not None:
            now = time.perf_counter()
            t["comb"] += now - start
            start = now

        r = self.kernels.band_interpolate(self.layout.edges, gains,
                                          self.layout.spectrum_bins,
                                          self.extend_top_gain)
        shaped = spectrum * r
        if t is not None:
            now = time.perf_counter()
            t["gains"] += now - start
            start = now
        audio = self.analyzer.overlap.synthesize(shaped)
        if t is not None:
            t["fft"] += time.perf_counter() - start

        self.frames_processed += 1
        return FrameResult(audio=audio, vad=vad, gains=gains)


def process_signal(denoiser: Denoiser, signal: np.ndarray,
                   oracle_gains: np.ndarray | None = None):
    """Feed a whole signal hop by hop (zero-padding the tail).

    Returns (audio, vads, gains): output of the same padded length (still
    one hop late relative to the input), per-frame voice probabilities, and
    the applied gains per frame.
    """
    signal = np.asarray(signal, dtype=np.float64)
    hop = denoiser.config.hop
    n_hops = -(-len(signal) // hop) if len(signal) else 0
    padded = np.zeros(n_hops * hop)
    padded[:len(signal)] = signal

    out = np.empty_like(padded)
    vads = np.empty(n_hops)
    gains = np.empty((n_hops, NUM_BANDS))
    for i in range(n_hops):
        chunk = padded[i * hop:(i + 1) * hop]
        if oracle_gains is not None:
            result = denoiser.process_with_gains(chunk, oracle_gains[i])
        else:
            result = denoiser.process(chunk)
        out[i * hop:(i + 1) * hop] = result.audio
        vads[i] = result.vad
        gains[i] = result.gains
    return out, vads, gains
