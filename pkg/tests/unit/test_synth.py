"""Unit tests for the synthetic record generator."""

from __future__ import annotations

import json

import numpy as np
import pytest
from pydantic import ValidationError

from association import pearson
from core.errors import ConfigError, InvalidInputError
from core.models import Beat, BPComponent
from reference import beat_bp
from synth import (
    MBP_FRACTION_RANGE,
    SEGMENT_LABELS,
    Coupling,
    Knob,
    SynthConfig,
    generate_record,
    knob_for,
    pressure_shape,
)

_FOUR_COUPLINGS = [
    {"feature": "PW50", "component": "SBP", "gain": -0.06},
    {"feature": "AM_3_4", "component": "DBP", "gain": 0.08},
    {"feature": "PW50", "component": "MBP", "gain": -0.06},
    {"feature": "PTT_2", "component": "PP", "gain": 0.1},
]


# ============================================================================
# Configuration
# ============================================================================

@pytest.mark.unit
class TestSynthConfig:
    """Validation and overrides."""

    def test_coupling_accepts_index_or_name(self):
        assert Coupling(feature=67, component=BPComponent.SBP, gain=1.0).feature == "PW50"
        assert Coupling(feature="AM_3_4", component="DBP", gain=1.0).component is BPComponent.DBP

    def test_unknown_coupled_feature(self):
        with pytest.raises(ValidationError):
            Coupling(feature="PW55", component=BPComponent.SBP, gain=1.0)

    def test_from_mapping_wraps_validation(self):
        with pytest.raises(ConfigError):
            SynthConfig.from_mapping({"duration_s": 1.0})
        with pytest.raises(ConfigError):
            SynthConfig.from_mapping({"unknown": 1})
        with pytest.raises(ConfigError):
            SynthConfig.from_mapping([1, 2])

    def test_four_components_can_be_planted(self):
        config = SynthConfig.from_mapping({"couplings": _FOUR_COUPLINGS})
        assert [c.feature for c in config.drivers] == ["PW50", "AM_3_4", "PTT_2"]
        assert config.mbp_tie is config.drivers[0]
        assert SynthConfig().mbp_tie is None

    def test_rri_cannot_be_coupled(self):
        with pytest.raises(ConfigError, match="does not depend on the pulse shape"):
            SynthConfig.from_mapping({"couplings": [{"feature": "RRI", "component": "SBP", "gain": 0.1}]})

    def test_features_cannot_share_a_knob(self):
        couplings = [
            {"feature": "PW50", "component": "SBP", "gain": -0.06},
            {"feature": "TD_1_5", "component": "PP", "gain": 0.05},
        ]
        with pytest.raises(ConfigError, match="would both set the pulse width"):
            SynthConfig.from_mapping({"couplings": couplings})

    def test_second_coupling_must_tie_mbp(self):
        couplings = [
            {"feature": "PW50", "component": "SBP", "gain": -0.06},
            {"feature": "PW50", "component": "DBP", "gain": -0.06},
        ]
        with pytest.raises(ConfigError, match="can only tie MBP"):
            SynthConfig.from_mapping({"couplings": couplings})

    def test_mbp_tie_keeps_gain_sign(self):
        couplings = [
            {"feature": "PW50", "component": "SBP", "gain": -0.06},
            {"feature": "PW50", "component": "MBP", "gain": 0.06},
        ]
        with pytest.raises(ConfigError, match="sign"):
            SynthConfig.from_mapping({"couplings": couplings})

    def test_single_mbp_tie(self):
        couplings = [
            *_FOUR_COUPLINGS,
            {"feature": "AM_3_4", "component": "MBP", "gain": 0.08},
        ]
        with pytest.raises(ConfigError, match="already tied"):
            SynthConfig.from_mapping({"couplings": couplings})

    @pytest.mark.parametrize(
        "name, knob",
        [
            ("PW50", Knob.WIDTH),
            ("TD_3_5", Knob.WIDTH),
            ("PTT_2", Knob.TRANSIT_DELAY),
            ("AM_3_4", Knob.AMPLITUDE),
            ("PI_PPG_FP5", Knob.AMPLITUDE),
            ("AR_1_5", Knob.AMPLITUDE),
            ("RI_b_a", Knob.DIASTOLIC_RATIO),
        ],
    )
    def test_knob_for_family(self, name, knob):
        assert knob_for(name) is knob

    def test_rri_has_no_knob(self):
        with pytest.raises(InvalidInputError):
            knob_for("RRI")

    def test_drug_segment_order(self):
        with pytest.raises(ConfigError):
            SynthConfig.from_mapping({"drug": {"start_fraction": 0.6, "end_fraction": 0.4}})

    def test_from_file(self, tmp_path):
        path = tmp_path / "synth.json"
        path.write_text(json.dumps({"seed": 4, "duration_s": 30}), encoding="utf-8")
        config = SynthConfig.from_file(path)
        assert (config.seed, config.duration_s) == (4, 30.0)
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            SynthConfig.from_file(path)
        with pytest.raises(ConfigError):
            SynthConfig.from_file(tmp_path / "missing.json")

    def test_with_overrides_ignores_none(self):
        config = SynthConfig(seed=1, duration_s=30.0).with_overrides(seed=9, duration_s=None)
        assert (config.seed, config.duration_s) == (9, 30.0)
        with pytest.raises(ConfigError):
            config.with_overrides(heart_rate_bpm=500.0)


# ============================================================================
# Pressure pulse
# ============================================================================

@pytest.mark.unit
class TestPressureShape:
    """Unit pulse with a prescribed mean."""

    @pytest.mark.parametrize("length, phi", [(800, 0.4), (500, 0.33), (1200, 0.45)])
    def test_shape(self, length, phi):
        shape = pressure_shape(length, phi)
        assert shape.size == length
        assert shape[0] == 0.0
        assert shape.max() == pytest.approx(1.0, abs=1e-15)
        assert shape.min() >= 0.0
        assert shape.mean() == pytest.approx(phi, rel=1e-12)

    def test_too_short(self):
        with pytest.raises(ConfigError):
            pressure_shape(3, 0.4)

    @pytest.mark.parametrize("phi", [1.0, 1e-4])
    def test_unreachable_mean(self, phi):
        with pytest.raises(ConfigError):
            pressure_shape(800, phi)


# ============================================================================
# Generation
# ============================================================================

@pytest.mark.unit
class TestGenerateRecord:
    """Determinism and planted truth."""

    def test_deterministic(self, short_config, short_record):
        again = generate_record(short_config)
        for first, second in zip(short_record[:3], again[:3]):
            np.testing.assert_array_equal(first.samples, second.samples)
        assert short_record[3] == again[3]

    def test_seed_changes_output(self, short_config, short_record):
        other = generate_record(short_config.with_overrides(seed=short_config.seed + 1))
        assert not np.array_equal(short_record[1].samples, other[1].samples)

    def test_channels_share_clock(self, short_record):
        ecg, ppg, abp, truth = short_record
        assert len(ecg) == len(ppg) == len(abp) == 20000
        assert ecg.fs == ppg.fs == abp.fs == truth.fs == 1000.0

    def test_r_peak_train(self, short_record):
        r_peaks = np.asarray(short_record[3].r_peaks)
        assert r_peaks[0] == 400
        assert np.all(np.diff(r_peaks) == 800)

    def test_heart_rate_ramp(self):
        truth = generate_record(SynthConfig(seed=2, duration_s=30.0, heart_rate_end_bpm=100.0))[3]
        spacing = np.diff(truth.r_peaks)
        assert spacing[0] > spacing[-1]
        assert np.all(np.diff(spacing) <= 0)

    def test_truth_bp_matches_waveform(self, short_record):
        _, _, abp, truth = short_record
        for beat in truth.beats:
            measured = beat_bp(abp, Beat(r_peak=beat.r_peak, onset=beat.onset, next_onset=beat.next_onset, rri=1.0))
            assert measured.dbp == beat.bp.dbp
            assert measured.sbp == pytest.approx(beat.bp.sbp, rel=1e-12)
            assert measured.mbp == pytest.approx(beat.bp.mbp, rel=1e-9)
            assert beat.bp.mbp == pytest.approx(beat.bp.dbp + 0.4 * beat.bp.pp, rel=1e-12)

    @pytest.mark.parametrize("shift", [-10, -3, 4, 10])
    def test_abp_tolerates_shifted_windows(self, short_record, shift):
        _, _, abp, truth = short_record
        for beat in truth.beats[1:-1]:
            window = Beat(
                r_peak=beat.r_peak, onset=beat.onset + shift, next_onset=beat.next_onset + shift, rri=1.0
            )
            measured = beat_bp(abp, window)
            assert measured.dbp == beat.bp.dbp
            assert measured.sbp == beat.bp.sbp
            assert measured.mbp == pytest.approx(beat.bp.mbp, abs=0.5)

    def test_bp_varies_without_couplings(self):
        truth = generate_record(SynthConfig(seed=8, duration_s=60.0, couplings=[]))[3]
        assert truth.planted == []
        pp = truth.bp_values(BPComponent.PP)
        dbp = truth.bp_values(BPComponent.DBP)
        assert 4.0 < np.std(pp) < 12.0
        assert 0.4 < np.std(dbp) < 1.6
        assert np.all(pp > 0)

    def test_default_couplings_are_exact(self, study_record):
        truth = study_record[3]
        assert truth.planted == [BPComponent.DBP, BPComponent.SBP]
        sbp = truth.bp_values(BPComponent.SBP)
        dbp = truth.bp_values(BPComponent.DBP)
        assert pearson(truth.target_values("PW50"), sbp) == pytest.approx(-1.0, abs=1e-9)
        assert pearson(truth.target_values("AM_3_4"), dbp) == pytest.approx(1.0, abs=1e-9)
        assert pearson(truth.driver_values("PW50"), sbp) < -0.9999
        assert pearson(truth.driver_values("AM_3_4"), dbp) > 0.9999
        assert truth.calibration_error["PW50"] < 1e-4
        assert truth.calibration_error["AM_3_4"] < 1e-4

    def test_drivers_follow_relative_gain(self, study_record):
        truth = study_record[3]
        sbp = truth.bp_values(BPComponent.SBP)
        slope, intercept = np.polyfit(sbp, truth.target_values("PW50"), 1)
        base = intercept + slope * sbp.mean()
        assert slope * np.std(sbp, ddof=1) / base == pytest.approx(-0.06, abs=0.005)

    def test_mbp_tie_follows_driver(self):
        config = SynthConfig.from_mapping({"seed": 4, "duration_s": 40.0, "couplings": _FOUR_COUPLINGS})
        truth = generate_record(config)[3]
        assert truth.planted == [BPComponent.DBP, BPComponent.MBP, BPComponent.PP, BPComponent.SBP]
        mbp = truth.bp_values(BPComponent.MBP)
        assert pearson(mbp, truth.bp_values(BPComponent.SBP)) == pytest.approx(1.0, abs=1e-9)
        fraction = (mbp - truth.bp_values(BPComponent.DBP)) / truth.bp_values(BPComponent.PP)
        assert MBP_FRACTION_RANGE[0] <= fraction.min() and fraction.max() <= MBP_FRACTION_RANGE[1]
        assert pearson(truth.target_values("PTT_2"), truth.bp_values(BPComponent.PP)) == pytest.approx(1.0, abs=1e-9)

    def test_infeasible_mbp_tie(self):
        config = SynthConfig.from_mapping(
            {"seed": 4, "duration_s": 40.0, "couplings": _FOUR_COUPLINGS, "bp": {"dbp_sd": 10.0}}
        )
        with pytest.raises(ConfigError, match="MBP fractions"):
            generate_record(config)

    def test_planted_landmarks_are_ordered(self, short_record):
        truth = short_record[3]
        assert len(truth.beats) >= 20
        for beat in truth.beats:
            assert beat.r_peak < beat.onset < beat.upstroke < beat.apex < beat.next_onset
            assert 0.15 < (beat.onset - beat.r_peak) / truth.fs < 0.35
            assert 0.07 < (beat.apex - beat.onset) / truth.fs < 0.2
        for first, second in zip(truth.beats, truth.beats[1:]):
            assert first.next_onset == second.onset

    def test_planted_onset_is_the_clean_minimum(self, short_record):
        _, ppg, _, truth = short_record
        for beat in truth.beats:
            lo, hi = beat.onset - 30, beat.onset + 31
            assert int(np.argmin(ppg.samples[lo:hi])) == 30

    def test_drug_segments(self, drug_record):
        _, ppg, _, truth = drug_record
        assert [s.name for s in truth.segments] == list(SEGMENT_LABELS)
        assert [(s.start, s.end) for s in truth.segments] == [(0, 40000), (40000, 80000), (80000, 120000)]
        labels = {beat.segment for beat in truth.beats}
        assert labels == set(SEGMENT_LABELS)
        assert len(ppg) == 120000

    def test_drug_strengthens_coupling(self, drug_record):
        truth = drug_record[3]
        by_segment = {}
        for label in SEGMENT_LABELS:
            chosen = [k for k, b in enumerate(truth.beats) if b.segment == label]
            by_segment[label] = abs(
                pearson(truth.driver_values("PW50")[chosen], truth.bp_values(BPComponent.SBP)[chosen])
            )
        assert by_segment["nitroglycerin"] > by_segment["rest-aortic"]
        assert by_segment["nitroglycerin"] > by_segment["rest-radial"]

    def test_measurement_noise_leaves_abp_clean(self, short_config, short_record):
        noisy = generate_record(short_config.with_overrides(noise={"snr_db": 15.0}))
        np.testing.assert_array_equal(noisy[2].samples, short_record[2].samples)
        assert not np.array_equal(noisy[0].samples, short_record[0].samples)

    def test_too_short_for_three_beats(self):
        with pytest.raises(ConfigError):
            generate_record(SynthConfig(duration_s=2.0))

    def test_monophasic_pulse(self):
        _, ppg, _, truth = generate_record(
            SynthConfig(seed=6, duration_s=20.0, pulse={"dicrotic": False}, couplings=[])
        )
        assert len(truth.beats) >= 20
        assert truth.planted == []
        assert np.all(np.isfinite(ppg.samples))
