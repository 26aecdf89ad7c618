"""Frame timing configuration for the 48 kHz processing loop."""

from __future__ import annotations

from dataclasses import dataclass

SAMPLE_RATE = 48000
WINDOW_SIZE = 960          # 20 ms
HOP_SIZE = 480             # 10 ms, 50% overlap
SPECTRUM_BINS = WINDOW_SIZE // 2 + 1

NUM_BANDS = 22
FEATURE_SIZE = 42

PITCH_MIN_PERIOD = 60      # 800 Hz
PITCH_MAX_PERIOD = 768     # 62.5 Hz
PITCH_DOWNSAMPLE = 4       # coarse search runs at 12 kHz

# Band energies below this count as silence when deciding whether a
# clean/noisy gain is defined (signals assumed normalized to ~unit RMS).
SILENCE_ENERGY = 1e-2


@dataclass(frozen=True)
class FrameConfig:
    """Window/hop geometry. The hop is exactly half the window and the
    window is 20 ms of audio at ``sample_rate``."""

    sample_rate: int = SAMPLE_RATE
    window_size: int = WINDOW_SIZE
    hop: int = HOP_SIZE

    def __post_init__(self):
        if self.hop * 2 != self.window_size:
            raise ValueError("hop must be exactly half the window size")
        if self.window_size * 50 != self.sample_rate:
            raise ValueError("window must span 20 ms at the sample rate")

    @property
    def spectrum_bins(self) -> int:
        return self.window_size // 2 + 1


DEFAULT_CONFIG = FrameConfig()
