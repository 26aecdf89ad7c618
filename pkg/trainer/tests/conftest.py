import numpy as np
import pytest
import scipy.io.wavfile
import scipy.signal

SAMPLE_RATE = 48000


def synth_speech(seconds, seed=0):
    """Voiced bursts with moving pitch and a formant-like rolloff,
    separated by silences: enough structure to learn band gains from."""
    rng = np.random.default_rng(seed)
    n = int(seconds * SAMPLE_RATE)
    out = np.zeros(n)
    pos = 0
    while pos < n:
        pos += int(rng.uniform(0.05, 0.3) * SAMPLE_RATE)  # pause
        burst = int(rng.uniform(0.3, 0.8) * SAMPLE_RATE)
        if pos >= n:
            break
        burst = min(burst, n - pos)
        t = np.arange(burst) / SAMPLE_RATE
        f0 = rng.uniform(100, 240) * (1 + 0.05 * np.sin(2 * np.pi * 3 * t))
        phase = 2 * np.pi * np.cumsum(f0) / SAMPLE_RATE
        seg = np.zeros(burst)
        for k in range(1, 16):
            if k * f0.mean() > 5000:
                break
            seg += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k ** 1.2
        env = np.minimum(1.0, np.minimum(t, (burst / SAMPLE_RATE) - t) * 20)
        out[pos:pos + burst] = seg * env * rng.uniform(0.3, 1.0)
        pos += burst
    peak = np.abs(out).max()
    return out / peak * 0.5 if peak > 0 else out


def synth_noise(seconds, seed=0, kind="white"):
    rng = np.random.default_rng(seed)
    n = int(seconds * SAMPLE_RATE)
    x = rng.standard_normal(n)
    if kind == "pink":
        b, a = scipy.signal.butter(1, 2000 / 24000)
        x = scipy.signal.lfilter(b, a, x)
    return x / np.abs(x).max() * 0.5


def write_wav(path, samples):
    scipy.io.wavfile.write(
        path, SAMPLE_RATE,
        np.clip(np.round(samples * 32768.0), -32768, 32767).astype(np.int16))


@pytest.fixture(scope="session")
def corpus_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    speech = root / "speech"
    noise = root / "noise"
    speech.mkdir()
    noise.mkdir()
    for i in range(3):
        write_wav(speech / f"speech_{i}.wav", synth_speech(20.0, seed=i))
    write_wav(noise / "white.wav", synth_noise(20.0, seed=10, kind="white"))
    write_wav(noise / "pink.wav", synth_noise(20.0, seed=11, kind="pink"))
    return str(speech), str(noise)


def segmental_snr(reference, estimate, frame=480, floor_db=-10.0,
                  ceil_db=35.0, activity_db=40.0):
    """Mean frame SNR over active reference frames, clamped per frame."""
    n = min(len(reference), len(estimate)) // frame * frame
    ref = reference[:n].reshape(-1, frame)
    err = (estimate[:n] - reference[:n]).reshape(-1, frame)
    e_ref = np.sum(ref ** 2, axis=1)
    active = e_ref > e_ref.max() * 10 ** (-activity_db / 10)
    snr = 10 * np.log10(e_ref[active]
                        / np.maximum(np.sum(err[active] ** 2, axis=1), 1e-30))
    return float(np.mean(np.clip(snr, floor_db, ceil_db)))
