import numpy as np
import pytest

from clearband import _kernels, build_layout


@pytest.fixture(scope="session")
def layout():
    return build_layout()


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    """Run kernel-level tests against every built backend."""
    return request.param


def harmonic_voice(n, f0=150.0, sr=48000, harmonics=8, seed=None):
    """Zero-mean harmonic complex with 1/k amplitude rolloff."""
    t = np.arange(n) / sr
    rng = np.random.default_rng(seed)
    sig = np.zeros(n)
    for k in range(1, harmonics + 1):
        phase = rng.uniform(0, 2 * np.pi) if seed is not None else 0.0
        sig += np.sin(2 * np.pi * k * f0 * t + phase) / k
    return sig / np.max(np.abs(sig))


def snr_db(reference, estimate):
    err = estimate - reference
    return 10 * np.log10(np.sum(reference ** 2) / np.sum(err ** 2))
