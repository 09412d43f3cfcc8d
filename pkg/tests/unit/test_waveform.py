"""Unit tests for sampled signals, smoothing, derivatives and level crossings."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.errors import DataError, DegenerateSeriesError, InvalidInputError, InvalidParameterError
from waveform import (
    Direction,
    SampledSignal,
    derivative,
    derive_channels,
    level_crossings,
    smooth,
    window_samples,
    zscore,
)


# ============================================================================
# SampledSignal
# ============================================================================

@pytest.mark.unit
class TestSampledSignal:
    """Construction rules and immutability."""

    def test_rejects_non_finite_sample_with_index(self):
        with pytest.raises(DataError, match="index 2"):
            SampledSignal(np.array([0.0, 1.0, np.nan, 2.0]), 100.0, "ppg")

    def test_rejects_non_positive_rate(self):
        with pytest.raises(InvalidInputError):
            SampledSignal(np.zeros(10), 0.0)

    def test_rejects_single_sample(self):
        with pytest.raises(InvalidInputError):
            SampledSignal(np.zeros(1), 100.0)

    def test_samples_are_read_only_copy(self):
        source = np.arange(5, dtype=float)
        signal = SampledSignal(source, 10.0)
        source[0] = 99.0
        assert signal.samples[0] == 0.0
        with pytest.raises(ValueError):
            signal.samples[0] = 1.0

    def test_duration_and_times(self):
        signal = SampledSignal(np.zeros(250), 125.0)
        assert signal.duration == 2.0
        assert signal.times()[-1] == pytest.approx(249 / 125.0)
        assert signal.time_of(25) == 0.2


# ============================================================================
# Smoothing / differentiation
# ============================================================================

@pytest.mark.unit
class TestSmooth:
    """Savitzky-Golay smoothing keeps length and low-order polynomials."""

    def test_window_samples_is_odd(self):
        assert window_samples(51.0, 1000.0) == 51
        assert window_samples(50.0, 1000.0) == 51
        assert window_samples(51.0, 500.0) == 27

    def test_cubic_reproduced_including_edges(self):
        t = np.arange(1000) / 1000.0
        x = t**3 - 2.0 * t**2 + t
        out = smooth(SampledSignal(x, 1000.0), 51.0, 3)
        assert len(out) == len(x)
        np.testing.assert_allclose(out.samples, x, atol=1e-9)

    def test_short_signal_uses_shrunken_windows(self):
        x = np.linspace(0.0, 1.0, 20)
        out = smooth(SampledSignal(x, 1000.0), 51.0, 3)
        np.testing.assert_allclose(out.samples, x, atol=1e-12)

    def test_window_too_small_for_order(self):
        with pytest.raises(InvalidParameterError):
            smooth(SampledSignal(np.zeros(100), 1000.0), 2.0, 3)

    def test_input_not_modified(self):
        x = np.sin(np.arange(500) / 20.0)
        signal = SampledSignal(x, 1000.0)
        smooth(signal)
        np.testing.assert_array_equal(signal.samples, x)

    def test_two_hertz_sine_keeps_amplitude(self):
        t = np.arange(3000) / 1000.0
        x = np.sin(2.0 * np.pi * 2.0 * t)
        out = smooth(SampledSignal(x, 1000.0), 51.0, 3).samples
        assert np.max(np.abs(out)) == pytest.approx(1.0, rel=0.01)
        assert np.max(np.abs(out - x)) < 0.01

    @settings(max_examples=50, deadline=None)
    @given(
        arrays(np.float64, 200, elements=st.floats(min_value=-10.0, max_value=10.0)),
        arrays(np.float64, 200, elements=st.floats(min_value=-10.0, max_value=10.0)),
        st.floats(min_value=-5.0, max_value=5.0),
        st.floats(min_value=-5.0, max_value=5.0),
    )
    def test_linear_in_the_input(self, x, y, a, b):
        fs = 500.0
        combined = smooth(SampledSignal(a * x + b * y, fs)).samples
        separate = a * smooth(SampledSignal(x, fs)).samples + b * smooth(SampledSignal(y, fs)).samples
        np.testing.assert_allclose(combined, separate, atol=1e-9)


@pytest.mark.unit
class TestDerivative:
    """np.gradient in units per second."""

    def test_linear_slope(self):
        fs = 250.0
        x = 2.0 * np.arange(100) / fs + 1.0
        np.testing.assert_allclose(derivative(SampledSignal(x, fs)).samples, 2.0, rtol=1e-9)

    def test_needs_three_samples(self):
        with pytest.raises(InvalidInputError):
            derivative(SampledSignal(np.zeros(2), 100.0))

    def test_sine_derivative(self):
        fs = 1000.0
        t = np.arange(3000) / fs
        slope = derivative(SampledSignal(np.sin(2.0 * np.pi * t), fs)).samples
        # central differences in the interior
        error = slope[1:-1] - 2.0 * np.pi * np.cos(2.0 * np.pi * t[1:-1])
        assert np.max(np.abs(error)) < 1e-4

    @settings(max_examples=50, deadline=None)
    @given(
        arrays(np.float64, 50, elements=st.floats(min_value=-10.0, max_value=10.0)),
        arrays(np.float64, 50, elements=st.floats(min_value=-10.0, max_value=10.0)),
        st.floats(min_value=-5.0, max_value=5.0),
    )
    def test_linear_in_the_input(self, x, y, a):
        fs = 100.0
        combined = derivative(SampledSignal(a * x + y, fs)).samples
        separate = a * derivative(SampledSignal(x, fs)).samples + derivative(SampledSignal(y, fs)).samples
        np.testing.assert_allclose(combined, separate, atol=1e-9)

    def test_derive_channels_aligned(self, gaussian_pulse):
        bundle = derive_channels(gaussian_pulse)
        assert len(bundle) == len(gaussian_pulse)
        assert bundle.fs == gaussian_pulse.fs
        assert (bundle.ppg.label, bundle.dppg.label, bundle.sdppg.label) == ("ppg", "dppg", "sdppg")
        assert bundle.ppg_raw is gaussian_pulse
        # dPPG crosses zero at the pulse peak
        assert abs(int(np.argmax(bundle.ppg.samples)) - 500) <= 1
        assert bundle.dppg.samples[480] > 0 > bundle.dppg.samples[520]


# ============================================================================
# zscore
# ============================================================================

finite_series = arrays(
    np.float64,
    st.integers(min_value=3, max_value=60),
    elements=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False),
)


@pytest.mark.unit
class TestZscore:
    """Standardization with sample standard deviation."""

    def test_mean_zero_unit_std(self):
        z = zscore(np.array([1.0, 2.0, 3.0, 4.0, 10.0]))
        assert z.mean() == pytest.approx(0.0, abs=1e-12)
        assert z.std(ddof=1) == pytest.approx(1.0)

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateSeriesError):
            zscore(np.full(5, 3.0))

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            zscore(np.array([1.0]))

    @settings(max_examples=50, deadline=None)
    @given(finite_series, st.floats(min_value=0.1, max_value=100.0), st.floats(min_value=-100.0, max_value=100.0))
    def test_affine_invariance(self, x, scale, shift):
        if np.std(x, ddof=1) < 1e-3:
            return
        np.testing.assert_allclose(zscore(scale * x + shift), zscore(x), atol=1e-6)
        np.testing.assert_allclose(zscore(-scale * x + shift), -zscore(x), atol=1e-6)


# ============================================================================
# Level crossings
# ============================================================================

@pytest.mark.unit
class TestLevelCrossings:
    """Linear interpolation between bracketing samples."""

    def test_rising_and_falling(self):
        signal = SampledSignal(np.array([0.0, 0.0, 2.0, 2.0, 0.0, 0.0]), 1.0)
        crossings = level_crossings(signal, 1.0, (0, 6))
        assert [c.time for c in crossings] == [1.5, 3.5]
        assert [c.direction for c in crossings] == [Direction.RISING, Direction.FALLING]

    def test_touch_is_not_a_crossing(self):
        signal = SampledSignal(np.array([0.0, 1.0, 0.0]), 1.0)
        assert level_crossings(signal, 1.0, (0, 3)) == []

    def test_search_window_offsets_time(self):
        signal = SampledSignal(np.array([0.0, 0.0, 0.0, 2.0, 2.0]), 10.0)
        crossings = level_crossings(signal, 1.0, (2, 5))
        assert len(crossings) == 1
        assert crossings[0].time == pytest.approx(0.25)

    def test_gaussian_half_width(self, gaussian_pulse):
        crossings = level_crossings(gaussian_pulse, 1.5, (0, len(gaussian_pulse)))
        assert [c.direction for c in crossings] == [Direction.RISING, Direction.FALLING]
        width_ms = 1000.0 * (crossings[1].time - crossings[0].time)
        # full width at half maximum of a 50 ms sigma Gaussian
        assert width_ms == pytest.approx(2.0 * np.sqrt(2.0 * np.log(2.0)) * 50.0, abs=1.0)
        assert width_ms == pytest.approx(117.7, abs=1.0)

    @pytest.mark.parametrize("search", [(3, 3), (-1, 2), (0, 99)])
    def test_bad_interval(self, search):
        with pytest.raises(InvalidInputError):
            level_crossings(SampledSignal(np.zeros(10), 1.0), 0.5, search)
