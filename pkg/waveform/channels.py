"""PPG derivative channels used by fiducial detection and feature extraction."""

from __future__ import annotations

from dataclasses import dataclass

from core.errors import InvalidInputError
from waveform.filters import derivative, smooth
from waveform.signal import SampledSignal


@dataclass(frozen=True, eq=False)
class SignalBundle:
    """
    Aligned PPG channels for one record.

    ppg_raw keeps the unsmoothed (DC-preserving) samples for the perfusion index;
    ppg, dppg and sdppg are the smoothed pulse and its first and second derivatives.
    """

    ppg_raw: SampledSignal
    ppg: SampledSignal
    dppg: SampledSignal
    sdppg: SampledSignal

    def __post_init__(self) -> None:
        """All channels share one clock."""
        channels = (self.ppg_raw, self.ppg, self.dppg, self.sdppg)
        if len({len(c) for c in channels}) != 1 or len({c.fs for c in channels}) != 1:
            raise InvalidInputError("PPG channels must have the same length and rate")

    @property
    def fs(self) -> float:
        """Shared sampling rate."""
        return self.ppg.fs

    def __len__(self) -> int:
        return len(self.ppg)


def derive_channels(
    ppg: SampledSignal,
    window_ms: float = 51.0,
    poly_order: int = 3,
) -> SignalBundle:
    """
    Smooth the PPG and differentiate it twice, re-smoothing between passes.

    sdPPG = d/dt smooth(d/dt smooth(PPG)); the same window is used for both
    smoothing passes.
    """
    ppg_s = smooth(ppg, window_ms, poly_order)
    dppg = derivative(ppg_s)
    sdppg = derivative(smooth(dppg, window_ms, poly_order))
    return SignalBundle(
        ppg_raw=ppg,
        ppg=ppg_s.with_samples(ppg_s.samples, label="ppg"),
        dppg=dppg.with_samples(dppg.samples, label="dppg"),
        sdppg=sdppg.with_samples(sdppg.samples, label="sdppg"),
    )
