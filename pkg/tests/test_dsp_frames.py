"""Window, DFT, and overlap-add reconstruction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from clearband import OverlapState, vorbis_window, window_array
from clearband.config import DEFAULT_CONFIG, HOP_SIZE, WINDOW_SIZE

N = WINDOW_SIZE


def dft_oracle(x):
    """Direct O(N^2) DFT of a real frame; returns the half spectrum."""
    n = len(x)
    k = np.arange(n // 2 + 1)[:, None]
    j = np.arange(n)[None, :]
    basis = np.exp(-2j * np.pi * k * j / n)
    return basis @ x


class TestWindow:
    def test_endpoints(self):
        assert vorbis_window(0, N) == 0.0
        assert vorbis_window(N // 2, N) == pytest.approx(1.0, abs=1e-15)

    def test_quarter_point(self):
        # sin^2(pi/4) = 1/2, so w = sin(pi/4)
        assert vorbis_window(240, N) == pytest.approx(0.7071067811865476,
                                                      abs=1e-12)

    def test_out_of_range_is_contract_violation(self):
        with pytest.raises(AssertionError):
            vorbis_window(N, N)
        with pytest.raises(AssertionError):
            vorbis_window(-1, N)

    def test_array_matches_scalar(self):
        w = window_array(N)
        idx = [0, 1, 100, 480, 700, 959]
        assert_allclose(w[idx], [vorbis_window(i, N) for i in idx],
                        atol=1e-15)

    def test_princen_bradley(self):
        w = window_array(N)
        residual = np.abs(w[:N // 2] ** 2 + w[N // 2:] ** 2 - 1.0)
        assert residual.max() < 1e-6


class TestAnalyze:
    def test_silence_gives_zero_spectrum(self):
        state = OverlapState()
        spec = state.analyze(np.zeros(HOP_SIZE))
        assert np.all(spec == 0)

    def test_wrong_hop_length_rejected(self):
        state = OverlapState()
        with pytest.raises(ValueError):
            state.analyze(np.zeros(HOP_SIZE + 1))

    def test_dc_steady_state(self):
        state = OverlapState()
        state.analyze(np.ones(HOP_SIZE))
        spec = state.analyze(np.ones(HOP_SIZE))
        w = window_array(N)
        assert spec[0].real == pytest.approx(w.sum(), rel=1e-12)
        assert abs(spec[0].imag) < 1e-9
        # off-DC magnitudes bounded by the window's own spectral leakage
        leak = np.abs(dft_oracle(w))
        assert np.all(np.abs(spec[1:]) <= leak[1:] + 1e-6)

    def test_matches_direct_dft(self):
        rng = np.random.default_rng(3)
        h1, h2 = rng.standard_normal((2, HOP_SIZE))
        state = OverlapState()
        state.analyze(h1)
        spec = state.analyze(h2)
        frame = np.concatenate([h1, h2]) * window_array(N)
        assert_allclose(spec, dft_oracle(frame), atol=1e-8)

    def test_sine_at_exact_bin_concentrates(self):
        k0 = 100  # 5 kHz
        t = np.arange(2 * N) / DEFAULT_CONFIG.sample_rate
        x = np.sin(2 * np.pi * k0 * 50.0 * t)
        state = OverlapState()
        spec = None
        for i in range(4):
            spec = state.analyze(x[i * HOP_SIZE:(i + 1) * HOP_SIZE])
        mags = np.abs(spec)
        assert np.argmax(mags) == k0
        # energy outside the mainlobe is window leakage, far below the peak
        far = np.delete(mags, np.arange(k0 - 5, k0 + 6))
        assert far.max() < 1e-3 * mags[k0]

    def test_real_signal_bins_are_real_at_dc_and_nyquist(self):
        rng = np.random.default_rng(4)
        state = OverlapState()
        spec = state.analyze(rng.standard_normal(HOP_SIZE))
        assert abs(spec[0].imag) < 1e-12
        assert abs(spec[-1].imag) < 1e-12


class TestSynthesize:
    def test_round_trip_reconstructs_with_one_hop_delay(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(HOP_SIZE * 20)
        state = OverlapState()
        out = np.concatenate([
            state.synthesize(state.analyze(x[i * HOP_SIZE:(i + 1) * HOP_SIZE]))
            for i in range(20)
        ])
        ref = x[:-HOP_SIZE]
        err = np.linalg.norm(out[HOP_SIZE:] - ref) / np.linalg.norm(ref)
        assert err < 1e-6
        assert err < 1e-12  # float64 headroom

    def test_zero_spectrum_flushes_tail_then_zeros(self):
        rng = np.random.default_rng(6)
        state = OverlapState()
        state.synthesize(state.analyze(rng.standard_normal(HOP_SIZE)))
        tail = state.synthesis_overlap.copy()
        out1 = state.synthesize(np.zeros(N // 2 + 1, dtype=complex))
        assert_allclose(out1, tail, atol=1e-15)
        out2 = state.synthesize(np.zeros(N // 2 + 1, dtype=complex))
        assert np.all(out2 == 0)

    def test_unit_spectrum_is_windowed_idft(self):
        spec = np.ones(N // 2 + 1, dtype=complex)
        state = OverlapState()
        out1 = state.synthesize(spec)
        out2 = state.synthesize(np.zeros_like(spec))
        produced = np.concatenate([out1, out2])
        # independent inverse: conjugate-symmetric extension, direct sum
        full = np.concatenate([spec, np.conj(spec[-2:0:-1])])
        n_idx = np.arange(N)
        basis = np.exp(2j * np.pi * np.outer(n_idx, np.arange(N)) / N)
        ref = np.real(basis @ full) / N * window_array(N)
        assert_allclose(produced, ref, atol=1e-9)

    def test_wrong_bin_count_rejected(self):
        state = OverlapState()
        with pytest.raises(ValueError):
            state.synthesize(np.zeros(N // 2, dtype=complex))


def test_parseval_with_symmetric_bin_accounting():
    rng = np.random.default_rng(7)
    state = OverlapState()
    for _ in range(5):
        h = rng.standard_normal(HOP_SIZE)
        prev = state.input_buffer.copy()
        spec = state.analyze(h)
        frame = np.concatenate([prev, h]) * window_array(N)
        time_energy = np.sum(frame ** 2)
        spec_energy = (np.abs(spec[0]) ** 2 + np.abs(spec[-1]) ** 2
                       + 2 * np.sum(np.abs(spec[1:-1]) ** 2)) / N
        assert_allclose(spec_energy, time_energy, rtol=1e-9)
