"""Uniformly sampled channel container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.errors import DataError, InvalidInputError


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """
    One uniformly sampled channel (ECG in mV, PPG in a.u., ABP in mmHg).

    Samples are stored as a read-only float64 copy, so instances can be shared
    freely between threads.
    """

    samples: np.ndarray
    fs: float
    label: str = ""

    def __post_init__(self) -> None:
        """Validate rate, length and finiteness, then freeze the sample buffer."""
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise InvalidInputError(f"sampling rate must be > 0 (got {self.fs})")
        data = np.array(self.samples, dtype=np.float64, copy=True)
        if data.ndim != 1:
            raise InvalidInputError("samples must be one-dimensional")
        if data.size < 2:
            raise InvalidInputError("a signal needs at least 2 samples")
        if not np.all(np.isfinite(data)):
            bad = int(np.flatnonzero(~np.isfinite(data))[0])
            raise DataError(f"channel {self.label or '?'} has a non-finite sample at index {bad}")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.fs

    def times(self) -> np.ndarray:
        """Sample times in seconds, starting at 0."""
        return np.arange(len(self)) / self.fs

    def time_of(self, index: float) -> float:
        """Convert a (possibly fractional) sample index to seconds."""
        return float(index) / self.fs

    def with_samples(self, samples: np.ndarray, label: str | None = None) -> "SampledSignal":
        """New signal on the same clock."""
        return SampledSignal(samples, self.fs, self.label if label is None else label)

    def shifted(self, offset: float) -> "SampledSignal":
        """Same channel plus a constant."""
        return self.with_samples(self.samples + offset)
