"""Per-beat 222-feature vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.errors import InvalidInputError
from core.models import Beat
from features.catalog import CATALOG, FEATURE_COUNT, R_PEAK, FeatureSpec
from features.families import (
    am_features,
    ar_features,
    pi_features,
    ptt_features,
    pw_features,
    ri_features,
    td_features,
)
from fiducials.points import FiducialSet
from waveform.channels import SignalBundle


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """
    Feature values of one beat in catalog order.

    Access is 1-based: `vector[67]` is PW50. NaN entries are missing, and
    `missing` is exactly `isnan(values)`.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        """Fix shape and freeze the array."""
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (FEATURE_COUNT,):
            raise InvalidInputError(f"a feature vector holds {FEATURE_COUNT} values, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def missing(self) -> np.ndarray:
        """Boolean mask of missing features."""
        return np.isnan(self.values)

    def __getitem__(self, index: int) -> float:
        if not 1 <= index <= FEATURE_COUNT:
            raise IndexError(f"feature index {index} outside 1..{FEATURE_COUNT}")
        return float(self.values[index - 1])

    def __len__(self) -> int:
        return FEATURE_COUNT

    def by_name(self) -> dict[str, float]:
        """Values keyed by catalog name."""
        return {spec.name: float(v) for spec, v in zip(CATALOG, self.values)}


def _dependencies_met(spec: FeatureSpec, fids: FiducialSet) -> bool:
    return all(fids.is_valid(int(dep[2:])) for dep in spec.dependencies if dep != R_PEAK)


def extract_all(signals: SignalBundle, fids: FiducialSet, beat: Beat) -> FeatureVector:
    """
    Compute all seven families for one beat.

    Any feature whose catalog dependencies include an invalid fiducial is
    missing, even if its family function produced a number.
    """
    fs = signals.fs
    values = np.concatenate(
        [
            ptt_features(fids, beat, fs),
            td_features(fids, beat, fs),
            pw_features(signals.ppg, fids),
            am_features(signals.ppg, fids),
            pi_features(signals.ppg, signals.dppg, signals.sdppg, fids),
            ar_features(signals.ppg, fids),
            ri_features(signals.ppg, signals.dppg, signals.sdppg, fids, beat, ppg_raw=signals.ppg_raw),
        ]
    )
    if not fids.is_complete:
        for spec in CATALOG:
            if not _dependencies_met(spec, fids):
                values[spec.index - 1] = np.nan
    return FeatureVector(values)


def feature_matrix(vectors: list[FeatureVector]) -> np.ndarray:
    """Stack vectors into a (beats, 222) array."""
    if not vectors:
        return np.empty((0, FEATURE_COUNT))
    return np.vstack([v.values for v in vectors])
