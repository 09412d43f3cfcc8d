"""Seeded synthetic ECG / PPG / ABP records with planted ground truth."""

from synth.config import (
    MBP_FRACTION_RANGE,
    SEGMENT_LABELS,
    BaseBP,
    Coupling,
    DrugEffect,
    Jitter,
    Knob,
    Noise,
    PulseShape,
    SynthConfig,
    knob_for,
)
from synth.generator import GroundTruth, TruthBeat, generate_record, pressure_shape

__all__ = [
    "MBP_FRACTION_RANGE",
    "SEGMENT_LABELS",
    "BaseBP",
    "Coupling",
    "DrugEffect",
    "GroundTruth",
    "Jitter",
    "Knob",
    "Noise",
    "PulseShape",
    "SynthConfig",
    "TruthBeat",
    "generate_record",
    "knob_for",
    "pressure_shape",
]
