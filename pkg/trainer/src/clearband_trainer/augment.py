"""Training-data augmentation: random spectral tilts, SNR mixing, speed.

Each example filters speech and noise independently with a random biquad
H(z) = (1 + r1 z^-1 + r2 z^-2) / (1 + r3 z^-1 + r4 z^-2), r uniform in
[-3/8, 3/8], so the network cannot rely on a fixed channel response (the
features deliberately keep absolute level and tilt). Speed/pitch variation
comes from pretending the source was recorded at 40-54 kHz, and level
variation from a random output gain. SNR is measured on active-speech
frames so silence-heavy files do not skew the mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

FILTER_COEFF_RANGE = 0.375          # +-3/8
RATE_RANGE = (40000, 54000)
RATE_STEP = 500                     # keeps the polyphase ratios small
ACTIVE_THRESHOLD_DB = 40.0          # frames within 40 dB of the peak count
FRAME = 480


@dataclass(frozen=True)
class AugmentationSpec:
    """One example's randomization. snr_db may be +inf (clean-only)."""

    speech_filter: tuple[float, float, float, float]
    noise_filter: tuple[float, float, float, float]
    snr_db: float
    speech_muted: bool
    level_db: float
    speech_rate: int
    noise_rate: int


def biquad_is_stable(r3: float, r4: float) -> bool:
    """Poles of z^2 + r3 z + r4 inside the unit circle."""
    return abs(r4) < 1.0 and abs(r3) < 1.0 + r4


def draw_filter_coeffs(rng) -> tuple[float, float, float, float]:
    """Uniform coefficients, redrawn if the denominator were unstable
    (cannot actually happen inside the +-3/8 box, but the contract stands)."""
    while True:
        r = rng.uniform(-FILTER_COEFF_RANGE, FILTER_COEFF_RANGE, 4)
        if biquad_is_stable(r[2], r[3]):
            return tuple(float(v) for v in r)


def apply_random_filter(x: np.ndarray, coeffs) -> np.ndarray:
    r1, r2, r3, r4 = coeffs
    return scipy.signal.lfilter([1.0, r1, r2], [1.0, r3, r4],
                                np.asarray(x, dtype=np.float64))


def pretend_rate_resample(x: np.ndarray, rate: int) -> np.ndarray:
    """Treat 48 kHz audio as if recorded at ``rate`` and convert back."""
    if rate == 48000:
        return np.asarray(x, dtype=np.float64).copy()
    g = math.gcd(48000, rate)
    return scipy.signal.resample_poly(np.asarray(x, dtype=np.float64),
                                      48000 // g, rate // g)


def sample_spec(rng, snr_range=(-5.0, 25.0), clean_prob=0.1,
                noise_only_prob=0.1, level_range=(-25.0, 0.0)) -> AugmentationSpec:
    roll = rng.uniform()
    muted = False
    if roll < clean_prob:
        snr = math.inf
    elif roll < clean_prob + noise_only_prob:
        snr = -math.inf
        muted = True
    else:
        snr = float(rng.uniform(*snr_range))
    rates = np.arange(RATE_RANGE[0], RATE_RANGE[1] + 1, RATE_STEP)
    return AugmentationSpec(
        speech_filter=draw_filter_coeffs(rng),
        noise_filter=draw_filter_coeffs(rng),
        snr_db=snr,
        speech_muted=muted,
        level_db=float(rng.uniform(*level_range)),
        speech_rate=int(rng.choice(rates)),
        noise_rate=int(rng.choice(rates)),
    )


def active_frames(x: np.ndarray, frame: int = FRAME,
                  threshold_db: float = ACTIVE_THRESHOLD_DB) -> np.ndarray:
    """Boolean mask of frames within ``threshold_db`` of the peak frame."""
    n = len(x) // frame
    energies = np.add.reduceat(x[:n * frame] ** 2,
                               np.arange(0, n * frame, frame))
    peak = energies.max(initial=0.0)
    if peak <= 0.0:
        return np.zeros(n, dtype=bool)
    return energies > peak * 10.0 ** (-threshold_db / 10.0)


def _mean_power(x: np.ndarray, mask: np.ndarray, frame: int = FRAME) -> float:
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return 0.0
    samples = np.concatenate([x[i * frame:(i + 1) * frame] for i in idx])
    return float(np.mean(samples ** 2))


def synthesize_pair(speech: np.ndarray, noise: np.ndarray,
                    spec: AugmentationSpec):
    """Returns (clean, noisy) with noisy = clean + scaled noise, sample-exact.

    Both sources get their own random tilt filter and speed change; the
    noise is scaled so the SNR over active-speech frames hits the target.
    """
    s = pretend_rate_resample(speech, spec.speech_rate)
    n = pretend_rate_resample(noise, spec.noise_rate)
    length = min(len(s), len(n))
    s, n = s[:length], n[:length]
    if spec.speech_muted:
        s = np.zeros(length)
    s = apply_random_filter(s, spec.speech_filter)
    n = apply_random_filter(n, spec.noise_filter)

    if spec.snr_db == math.inf:
        noise_scale = 0.0
    else:
        mask = active_frames(s)
        p_speech = _mean_power(s, mask)
        if p_speech <= 0.0:          # muted or silent speech: noise-only
            noise_scale = 1.0
        else:
            p_noise = _mean_power(n, mask)
            noise_scale = (np.sqrt(p_speech
                                   / (p_noise * 10.0 ** (spec.snr_db / 10.0)))
                           if p_noise > 0.0 else 0.0)

    level = 10.0 ** (spec.level_db / 20.0)
    clean = level * s
    noisy = clean + (level * noise_scale) * n
    return clean, noisy
