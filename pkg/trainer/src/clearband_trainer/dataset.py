"""Corpus synthesis and shard IO.

``synthesize_corpus`` mixes random speech/noise cuts with the augmentation
recipe and writes one .npz shard per example (features, gains, mask, vad)
plus a manifest. Training consumes shards as stateful windows of at most
2000 frames; recurrence runs within a window and resets between windows.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
import scipy.io.wavfile

from clearband import FEATURE_VERSION, build_layout

from .augment import sample_spec, synthesize_pair
from .targets import TrainingExample, build_example

WINDOW_FRAMES = 2000
EXAMPLE_SECONDS = 15.0
SAMPLE_RATE = 48000


def load_wav_48k(path) -> np.ndarray:
    rate, data = scipy.io.wavfile.read(path)
    if rate != SAMPLE_RATE:
        raise ValueError(f"{path}: {rate} Hz input; corpus must be 48 kHz")
    if data.ndim != 1:
        raise ValueError(f"{path}: corpus audio must be mono")
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    return np.asarray(data, dtype=np.float64)


def list_audio(directory) -> list:
    paths = sorted(Path(directory).glob("*.wav"))
    if not paths:
        raise ValueError(f"no .wav files in {directory}")
    return paths


def _random_cut(audio: np.ndarray, length: int, rng) -> np.ndarray:
    if len(audio) >= length:
        start = int(rng.integers(0, len(audio) - length + 1))
        return audio[start:start + length]
    reps = -(-length // len(audio))
    return np.tile(audio, reps)[:length]


def synthesize_corpus(speech_dir, noise_dir, out_dir, hours: float,
                      seed: int = 0, example_seconds: float = EXAMPLE_SECONDS,
                      log=None) -> dict:
    """Generate shards totalling ``hours`` of mixed audio; returns the
    manifest (also written to out_dir/manifest.json)."""
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    speech_files = [load_wav_48k(p) for p in list_audio(speech_dir)]
    noise_files = [load_wav_48k(p) for p in list_audio(noise_dir)]

    target_frames = int(hours * 3600 * 100)
    cut = int(example_seconds * SAMPLE_RATE)
    total_frames = 0
    shards = []
    index = 0
    while total_frames < target_frames:
        speech = _random_cut(speech_files[rng.integers(len(speech_files))],
                             cut, rng)
        noise = _random_cut(noise_files[rng.integers(len(noise_files))],
                            cut, rng)
        spec = sample_spec(rng)
        clean, noisy = synthesize_pair(speech, noise, spec)
        example = build_example(clean, noisy)
        name = f"shard_{index:05d}.npz"
        np.savez_compressed(out / name, features=example.features,
                            gains=example.gains, mask=example.mask,
                            vad=example.vad)
        shards.append(name)
        total_frames += len(example.features)
        index += 1
        if log:
            log(f"{name}: {len(example.features)} frames "
                f"(snr {spec.snr_db:+.1f} dB)")

    manifest = {
        "shards": shards,
        "frames": total_frames,
        "seed": seed,
        "feature_version": FEATURE_VERSION,
        "band_edges": build_layout().edges.tolist(),
        "window_frames": WINDOW_FRAMES,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def load_corpus(data_dir) -> list[TrainingExample]:
    data = Path(data_dir)
    manifest = json.loads((data / "manifest.json").read_text())
    if manifest["feature_version"] != FEATURE_VERSION:
        raise ValueError("corpus was built with a different feature version")
    examples = []
    for name in manifest["shards"]:
        with np.load(data / name) as z:
            examples.append(TrainingExample(
                features=z["features"], gains=z["gains"], mask=z["mask"],
                vad=z["vad"]))
    return examples


def window_examples(examples, window: int = WINDOW_FRAMES):
    """Split examples into recurrence windows of at most ``window`` frames."""
    windows = []
    for ex in examples:
        for start in range(0, len(ex.features), window):
            stop = start + window
            windows.append(TrainingExample(
                features=ex.features[start:stop], gains=ex.gains[start:stop],
                mask=ex.mask[start:stop], vad=ex.vad[start:stop]))
    return windows
