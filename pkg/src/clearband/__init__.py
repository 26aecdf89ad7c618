"""Real-time 48 kHz speech noise suppression.

Per 20 ms frame (10 ms hop): a small recurrent network predicts 22
critical-band gains from 42 spectral/pitch features; a pitch comb filter
attenuates noise between harmonics; gains are interpolated across DFT bins
and the frame is resynthesized by windowed overlap-add.
"""

from . import _kernels
from .analysis import FrameAnalysis, FrameAnalyzer
from .bands import (BandLayout, band_accumulate, band_energies, build_layout,
                    ideal_gains, interpolate_gains)
from .config import (DEFAULT_CONFIG, FEATURE_SIZE, HOP_SIZE, NUM_BANDS,
                     SAMPLE_RATE, SILENCE_ENERGY, WINDOW_SIZE, FrameConfig)
from .denoise import (GAIN_DECAY, Denoiser, FrameResult, process_signal,
                      smooth_gains)
from .dsp import OverlapState, vorbis_window, window_array
from .features import FEATURE_VERSION, FeatureExtractor
from .model_format import ModelFormatError
from .nn import (Model, NetworkState, load_model, make_random_model,
                 network_forward, save_model)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Name of the kernel backend selected at import ("cython" or "numpy")."""
    return _kernels.default_backend()


__all__ = [
    "BandLayout", "DEFAULT_CONFIG", "Denoiser", "FEATURE_SIZE",
    "FEATURE_VERSION", "FeatureExtractor", "FrameAnalysis", "FrameAnalyzer",
    "FrameConfig", "FrameResult", "GAIN_DECAY", "HOP_SIZE", "Model",
    "ModelFormatError", "NetworkState", "NUM_BANDS", "OverlapState",
    "SAMPLE_RATE", "SILENCE_ENERGY", "WINDOW_SIZE", "band_accumulate",
    "band_energies", "build_layout", "ideal_gains", "interpolate_gains",
    "kernel_backend", "load_model", "make_random_model", "network_forward",
    "process_signal", "save_model", "smooth_gains", "vorbis_window",
    "window_array",
]
