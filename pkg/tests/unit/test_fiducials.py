"""Unit tests for fiducial point detection."""

from __future__ import annotations

import numpy as np
import pytest

from core.errors import InvalidInputError
from core.models import Beat
from fiducials import FIDUCIAL_COUNT, FiducialSet, locate_fiducials, locate_in_bundle
from segmentation import segment_record
from waveform import SampledSignal, derive_channels


@pytest.mark.unit
class TestFiducialSet:
    """Ordering and validity bookkeeping."""

    def test_from_points_marks_missing_invalid(self):
        fids = FiducialSet.from_points({1: 10, 5: 50, 11: 90})
        assert fids.is_valid(5)
        assert not fids.is_valid(2)
        assert fids.fp[1] == -1
        assert not fids.is_complete

    def test_valid_points_must_increase(self):
        with pytest.raises(InvalidInputError):
            FiducialSet.from_points({1: 10, 3: 40, 5: 30, 11: 90})

    def test_without(self):
        fids = FiducialSet.from_points({k: 10 * k for k in range(1, FIDUCIAL_COUNT + 1)})
        assert fids.is_complete
        reduced = fids.without(6, 7)
        assert not reduced.is_valid(6) and not reduced.is_valid(7)
        assert reduced.index(8) == 80
        with pytest.raises(InvalidInputError):
            reduced.index(6)

    def test_needs_eleven_points(self):
        with pytest.raises(InvalidInputError):
            FiducialSet((1, 2, 3), (True, True, True))


@pytest.mark.unit
class TestLocateFiducials:
    """Detection on hand-built and synthetic pulses."""

    def test_single_gaussian_has_no_dicrotic_points(self, gaussian_pulse):
        bundle = derive_channels(gaussian_pulse)
        fids = locate_in_bundle(bundle, Beat(r_peak=150, onset=200, next_onset=800, rri=0.6))
        assert fids.index(1) == 200
        assert fids.index(11) == 800
        assert abs(fids.index(5) - 500) <= 1
        assert fids.index(1) < fids.index(2) < fids.index(3) < fids.index(5)
        # the sdPPG a wave of a Gaussian sits sqrt(3) sigma before the peak
        assert abs(fids.index(2) - (500 - np.sqrt(3.0) * 50)) <= 5
        for k in (6, 7, 8, 9, 10):
            assert not fids.is_valid(k)

    def test_synthetic_beats_are_ordered(self, short_record):
        ecg, ppg, _, _ = short_record
        beats = segment_record(ecg, ppg).beats
        bundle = derive_channels(ppg)
        assert beats
        for beat in beats:
            fids = locate_in_bundle(bundle, beat)
            for k in (1, 3, 5, 11):
                assert fids.is_valid(k)
            present = [fids.fp[k - 1] for k in range(1, FIDUCIAL_COUNT + 1) if fids.is_valid(k)]
            assert present == sorted(set(present))
            assert beat.onset <= present[0] and present[-1] <= beat.next_onset

    def test_synthetic_dicrotic_pulse_is_mostly_complete(self, short_record):
        ecg, ppg, _, _ = short_record
        beats = segment_record(ecg, ppg).beats
        bundle = derive_channels(ppg)
        complete = [locate_in_bundle(bundle, beat).is_complete for beat in beats]
        assert sum(complete) >= 0.9 * len(complete)

    def test_upstroke_and_peak_match_planted_landmarks(self, short_record):
        _, ppg, _, truth = short_record
        bundle = derive_channels(ppg)
        for planted in truth.beats:
            beat = Beat(r_peak=planted.r_peak, onset=planted.onset, next_onset=planted.next_onset, rri=1.0)
            fids = locate_in_bundle(bundle, beat)
            assert abs(fids.index(3) - planted.upstroke) <= 5
            assert abs(fids.index(5) - planted.apex) <= 5

    def test_derivative_signs_at_points(self, short_record):
        _, ppg, _, truth = short_record
        bundle = derive_channels(ppg)
        dppg, sdppg = bundle.dppg.samples, bundle.sdppg.samples
        for planted in truth.beats:
            beat = Beat(r_peak=planted.r_peak, onset=planted.onset, next_onset=planted.next_onset, rri=1.0)
            fids = locate_in_bundle(bundle, beat)
            f1, f3, f5 = fids.index(1), fids.index(3), fids.index(5)
            assert dppg[f3] == np.max(dppg[f1 + 1 : f5])
            if fids.is_valid(2):
                assert sdppg[fids.index(2)] > 0
            if fids.is_valid(4):
                assert sdppg[fids.index(4)] < 0

    def _hand_built(self, sdppg_points: dict[int, float]):
        i = np.arange(20, dtype=np.float64)
        ppg = SampledSignal(100.0 - (i - 10.0) ** 2, 100.0, "ppg")
        dppg = np.zeros(20)
        dppg[5], dppg[14] = 1.0, -1.0
        sdppg = np.zeros(20)
        for index, value in sdppg_points.items():
            sdppg[index] = value
        beat = Beat(r_peak=0, onset=1, next_onset=19, rri=0.2)
        return locate_fiducials(ppg, ppg.with_samples(dppg, "dppg"), ppg.with_samples(sdppg, "sdppg"), beat)

    def test_a_wave_excludes_the_upstroke_point(self):
        # the only positive sdPPG maximum sits on FP3 itself
        fids = self._hand_built({5: 1.0, 7: -1.0})
        assert fids.index(3) == 5
        assert not fids.is_valid(2)
        assert fids.index(4) == 7

    def test_b_wave_excludes_the_upstroke_point(self):
        fids = self._hand_built({5: -1.0, 8: -1.0})
        assert fids.index(3) == 5
        assert fids.index(4) == 8

    def test_beat_outside_signal(self, gaussian_pulse):
        bundle = derive_channels(gaussian_pulse)
        with pytest.raises(InvalidInputError):
            locate_fiducials(bundle.ppg, bundle.dppg, bundle.sdppg, Beat(r_peak=10, onset=20, next_onset=1000, rri=1.0))

    def test_channel_mismatch(self, gaussian_pulse, gaussian_beat):
        bundle = derive_channels(gaussian_pulse)
        short = bundle.dppg.with_samples(bundle.dppg.samples[:-1])
        with pytest.raises(InvalidInputError):
            locate_fiducials(bundle.ppg, short, bundle.sdppg, gaussian_beat)
