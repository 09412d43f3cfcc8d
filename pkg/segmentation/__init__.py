"""Beat segmentation: R peaks, pulse onsets and their pairing into cycles."""

from segmentation.detectors import detect_pulse_onsets, detect_r_peaks
from segmentation.pairing import Segmentation, assign_segments, pair_beats, segment_record

__all__ = [
    "detect_pulse_onsets",
    "detect_r_peaks",
    "pair_beats",
    "assign_segments",
    "segment_record",
    "Segmentation",
]
