"""Band layout, energies, ideal gains, and gain interpolation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from clearband import (FrameConfig, band_energies, build_layout, ideal_gains,
                       interpolate_gains)
from clearband.bands import band_accumulate
from clearband.config import NUM_BANDS, SPECTRUM_BINS

BINS = SPECTRUM_BINS
COVERED = 401  # bins 0..400 carry band weight


class TestLayout:
    def test_band_count(self, layout):
        assert layout.band_count == 22
        assert layout.weights.shape == (22, BINS)

    def test_edges_table(self, layout):
        expected = [0, 4, 8, 12, 16, 20, 24, 28, 32, 40, 48, 56, 64,
                    80, 96, 112, 136, 160, 192, 240, 312, 400, 400]
        assert layout.edges.tolist() == expected

    def test_partition_of_unity(self, layout):
        sums = layout.weights.sum(axis=0)
        assert np.abs(sums[:COVERED] - 1.0).max() < 1e-9
        assert np.all(sums[COVERED:] == 0.0)

    def test_weights_nonnegative(self, layout):
        assert np.all(layout.weights >= 0.0)

    def test_low_bands_span_at_least_four_bins(self, layout):
        edges = layout.edges
        widths = np.diff(edges[:-1])
        assert np.all(widths >= 4)

    def test_peak_at_band_boundary(self, layout):
        for b in range(layout.band_count):
            peak = layout.edges[b]
            assert layout.weights[b, peak] == pytest.approx(1.0)

    def test_unsupported_config_rejected(self):
        with pytest.raises(ValueError):
            build_layout(FrameConfig(sample_rate=16000, window_size=320,
                                     hop=160))


class TestBandEnergies:
    def test_zero_spectrum(self, layout):
        assert np.all(band_energies(layout, np.zeros(BINS, complex)) == 0)

    def test_flat_spectrum_total_is_covered_bins(self, layout):
        e = band_energies(layout, np.ones(BINS, complex))
        assert e.sum() == pytest.approx(COVERED, rel=1e-12)
        assert np.all(e > 0)

    def test_single_bin_at_peak_lands_in_one_band(self, layout):
        spec = np.zeros(BINS, complex)
        spec[layout.edges[5]] = 3.0
        e = band_energies(layout, spec)
        expected = layout.weights @ (np.abs(spec) ** 2)  # direct evaluation
        assert_allclose(e, expected, atol=1e-12)
        assert e[5] == pytest.approx(9.0)
        assert np.sum(e > 0) == 1

    def test_homogeneous_in_power(self, layout, backend):
        rng = np.random.default_rng(0)
        spec = rng.standard_normal(BINS) + 1j * rng.standard_normal(BINS)
        e1 = band_energies(layout, spec, backend=backend)
        e2 = band_energies(layout, 2.0 * spec, backend=backend)
        assert_allclose(e2, 4.0 * e1, rtol=1e-12)

    def test_matches_direct_weight_sum(self, layout, backend):
        rng = np.random.default_rng(1)
        values = rng.standard_normal(BINS)
        got = band_accumulate(layout, values, backend=backend)
        assert_allclose(got, layout.weights @ values, atol=1e-12)


class TestIdealGains:
    def test_clean_input_gives_unity(self):
        e = np.full(NUM_BANDS, 2.0)
        gains, defined = ideal_gains(e, e)
        assert np.all(defined)
        assert_allclose(gains, 1.0)

    def test_pure_noise_gives_zero(self):
        zeros = np.zeros(NUM_BANDS)
        noisy = np.ones(NUM_BANDS)
        gains, defined = ideal_gains(zeros, noisy)
        assert np.all(defined)
        assert_allclose(gains, 0.0)

    def test_quarter_energy_gives_half_gain(self):
        gains, _ = ideal_gains(np.full(NUM_BANDS, 0.25),
                               np.full(NUM_BANDS, 1.0))
        assert_allclose(gains, 0.5, rtol=0, atol=0)

    def test_silence_marks_undefined(self):
        clean = np.zeros(NUM_BANDS)
        noisy = np.zeros(NUM_BANDS)
        noisy[3] = 5.0
        _, defined = ideal_gains(clean, noisy)
        assert defined[3]
        assert not np.any(defined[np.arange(NUM_BANDS) != 3])

    def test_clamped_at_one_under_phase_cancellation(self):
        gains, _ = ideal_gains(np.full(NUM_BANDS, 4.0),
                               np.full(NUM_BANDS, 1.0))
        assert np.all(gains == 1.0)

    @given(st.floats(1e-3, 1e3))
    def test_scale_invariance(self, c):
        rng = np.random.default_rng(9)
        clean = rng.uniform(0.05, 10.0, NUM_BANDS)
        noisy = rng.uniform(0.05, 10.0, NUM_BANDS)
        g1, d1 = ideal_gains(clean, noisy)
        g2, d2 = ideal_gains(c * clean, c * noisy)
        mutual = d1 & d2
        assert_allclose(g1[mutual], g2[mutual], rtol=1e-9)


class TestInterpolateGains:
    def test_constant_gains_give_constant(self, layout, backend):
        r = interpolate_gains(layout, np.full(NUM_BANDS, 0.7),
                              backend=backend)
        assert_allclose(r[:COVERED], 0.7, atol=1e-12)
        assert_allclose(r[COVERED:], 0.7, atol=1e-12)  # extension

    def test_unity_gains_leave_spectrum_unchanged(self, layout):
        rng = np.random.default_rng(2)
        spec = rng.standard_normal(BINS) + 1j * rng.standard_normal(BINS)
        r = interpolate_gains(layout, np.ones(NUM_BANDS))
        assert_allclose(r, 1.0, atol=1e-12)
        assert_allclose(spec * r, spec, rtol=1e-12)

    def test_alternating_gains_ramp_linearly(self, layout):
        gains = np.zeros(NUM_BANDS)
        gains[1::2] = 1.0
        r = interpolate_gains(layout, gains)
        expected = layout.weights.T @ gains  # direct evaluation
        assert_allclose(r[:COVERED], expected[:COVERED], atol=1e-12)
        lo, hi = layout.edges[4], layout.edges[5]  # 0 -> 1 transition
        ramp = r[lo:hi + 1]
        assert_allclose(np.diff(ramp), np.diff(ramp)[0], atol=1e-12)
        assert ramp[0] == pytest.approx(0.0) and ramp[-1] == pytest.approx(1.0)

    def test_no_extension_zeroes_top_bins(self, layout):
        r = interpolate_gains(layout, np.ones(NUM_BANDS), extend_last=False)
        assert np.all(r[COVERED:] == 0.0)

    @settings(max_examples=25)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(-2.0, 2.0),
           st.floats(-2.0, 2.0))
    def test_linearity(self, layout, seed, a, b):
        rng = np.random.default_rng(seed)
        g1, g2 = rng.uniform(0, 1, (2, NUM_BANDS))
        lhs = interpolate_gains(layout, a * g1 + b * g2)
        rhs = a * interpolate_gains(layout, g1) + b * interpolate_gains(layout, g2)
        assert_allclose(lhs, rhs, atol=1e-9)

    def test_monotone_in_each_band_gain(self, layout):
        rng = np.random.default_rng(3)
        gains = rng.uniform(0, 0.8, NUM_BANDS)
        base = interpolate_gains(layout, gains)
        for b in range(NUM_BANDS):
            bumped = gains.copy()
            bumped[b] += 0.2
            assert np.all(interpolate_gains(layout, bumped) >= base - 1e-12)
