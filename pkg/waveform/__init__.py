"""Waveform primitives: sampled signals, smoothing, derivatives, level crossings."""

from waveform.channels import SignalBundle, derive_channels
from waveform.filters import (
    Crossing,
    Direction,
    derivative,
    level_crossings,
    smooth,
    window_samples,
    zscore,
)
from waveform.signal import SampledSignal

__all__ = [
    "SampledSignal",
    "SignalBundle",
    "derive_channels",
    "Crossing",
    "Direction",
    "derivative",
    "level_crossings",
    "smooth",
    "window_samples",
    "zscore",
]
