"""
Analysis configuration for pulse-features.

Two layers:
- AnalysisDefaults: validated class constants, the single source of default values.
- RunConfig: the per-run, user-overridable configuration (JSON file or CLI flags),
  validated by pydantic with unknown keys rejected.

Design: defaults target 1000 Hz finger PPG with lead ECG and catheter ABP; every
millisecond parameter is converted to samples with the record's own rate.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.errors import ConfigError
from core.models import MetricWeights


class AnalysisDefaults:
    """
    Default analysis settings.

    Rationale for each value is recorded in DESIGN.md.
    """

    # ========================================================================
    # Smoothing / differentiation
    # ========================================================================

    SMOOTHING_WINDOW_MS: float = 51.0
    """Savitzky-Golay window for PPG, dPPG and sdPPG."""

    SMOOTHING_POLY_ORDER: int = 3
    """Local polynomial order."""

    ONSET_SMOOTHING_WINDOW_MS: float = 101.0
    """Wider window used only to locate pulse feet."""

    # ========================================================================
    # R-peak detection
    # ========================================================================

    R_BAND_HZ: tuple[float, float] = (5.0, 15.0)
    """QRS band emphasized before the energy transform."""

    R_INTEGRATION_MS: float = 150.0
    """Moving-integration window."""

    R_REFRACTORY_MS: float = 200.0
    """Minimum spacing between R peaks."""

    R_THRESHOLD_RATIO: float = 0.4
    """Acceptance threshold as a fraction of the running median peak height."""

    R_HISTORY: int = 8
    """Accepted peak heights kept for the running median."""

    R_REFINE_MS: float = 25.0
    """Half-width of the raw-ECG window used to refine each peak."""

    # ========================================================================
    # Onset detection / pairing
    # ========================================================================

    ONSET_MIN_DISTANCE_MS: float = 300.0
    """At most one onset per this many milliseconds."""

    ONSET_PROMINENCE_RATIO: float = 0.3
    """Minimum valley prominence as a fraction of the 5-95 percentile spread."""

    ONSET_PEAK_SEARCH_MS: float = 400.0
    """The pulse peak is looked for this far after a coarse valley."""

    ONSET_FIT_LOOKBACK_MS: float = 80.0
    """The foot model is fitted from this far before the coarse valley."""

    ONSET_REFINE_MAX_MS: float = 40.0
    """A refined foot further than this from the coarse valley is discarded."""

    PAIR_WINDOW_MS: tuple[float, float] = (50.0, 700.0)
    """Onset must follow its R peak by this many milliseconds."""

    RRI_RANGE_S: tuple[float, float] = (0.24, 2.0)
    """Physiologically plausible R-R interval."""

    MIN_RECORD_SECONDS: float = 2.0
    """Detectors refuse shorter inputs."""

    # ========================================================================
    # Association
    # ========================================================================

    CSE_M: int = 2
    """Cross-sample-entropy embedding length."""

    CSE_R: float = 0.2
    """Cross-sample-entropy tolerance on standardized series."""

    MI_MAX_BINS: int = 16
    """Upper bound of the automatic equal-frequency bin count."""

    MIN_BEATS: int = 12
    """Fewest beats for which a cell is reported."""

    THREADS_ENV: str = "PULSEFEAT_THREADS"
    """Environment variable capping the association fan-out."""

    # ========================================================================
    # Ranking
    # ========================================================================

    TOP_K: int = 5
    """Rows kept in the emitted top-k tables."""

    CONSISTENCY_MIN_ABS_CC: float = 0.5
    """Smallest |CC| a feature needs in every profile to count as consistent."""

    @classmethod
    def validate(cls) -> None:
        """
        Validate defaults at startup.

        Raises:
            AssertionError: If any default is out of range.
        """
        assert cls.SMOOTHING_WINDOW_MS > 0, "SMOOTHING_WINDOW_MS must be > 0"
        assert cls.SMOOTHING_POLY_ORDER >= 1, "SMOOTHING_POLY_ORDER must be >= 1"
        assert (
            cls.ONSET_SMOOTHING_WINDOW_MS >= cls.SMOOTHING_WINDOW_MS
        ), "onset smoothing must not be narrower than feature smoothing"
        assert 0 < cls.R_BAND_HZ[0] < cls.R_BAND_HZ[1], "R_BAND_HZ must be increasing"
        assert 0 < cls.R_THRESHOLD_RATIO < 1, "R_THRESHOLD_RATIO must be in (0, 1)"
        assert cls.R_HISTORY >= 1, "R_HISTORY must be >= 1"
        assert 0 <= cls.PAIR_WINDOW_MS[0] < cls.PAIR_WINDOW_MS[1], "PAIR_WINDOW_MS invalid"
        assert 0 < cls.RRI_RANGE_S[0] < cls.RRI_RANGE_S[1], "RRI_RANGE_S invalid"
        assert cls.CSE_M >= 1, "CSE_M must be >= 1"
        assert cls.CSE_R > 0, "CSE_R must be > 0"
        assert cls.MI_MAX_BINS >= 2, "MI_MAX_BINS must be >= 2"
        assert cls.MIN_BEATS >= 3, "MIN_BEATS must be >= 3"
        assert cls.TOP_K >= 1, "TOP_K must be >= 1"


# Validate at module import time
AnalysisDefaults.validate()


class RunConfig(BaseModel):
    """Per-run analysis parameters. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    smoothing_window_ms: float = Field(default=AnalysisDefaults.SMOOTHING_WINDOW_MS, gt=0)
    poly_order: int = Field(default=AnalysisDefaults.SMOOTHING_POLY_ORDER, ge=1, le=6)
    onset_window_ms: float = Field(default=AnalysisDefaults.ONSET_SMOOTHING_WINDOW_MS, gt=0)
    r_refractory_ms: float = Field(default=AnalysisDefaults.R_REFRACTORY_MS, ge=200.0)
    r_threshold_ratio: float = Field(default=AnalysisDefaults.R_THRESHOLD_RATIO, gt=0, lt=1)
    pair_min_ms: float = Field(default=AnalysisDefaults.PAIR_WINDOW_MS[0], ge=0)
    pair_max_ms: float = Field(default=AnalysisDefaults.PAIR_WINDOW_MS[1], gt=0)
    rri_min_s: float = Field(default=AnalysisDefaults.RRI_RANGE_S[0], gt=0)
    rri_max_s: float = Field(default=AnalysisDefaults.RRI_RANGE_S[1], gt=0)
    include_implausible: bool = False
    cse_m: int = Field(default=AnalysisDefaults.CSE_M, ge=1, le=5)
    cse_r: float = Field(default=AnalysisDefaults.CSE_R, gt=0, le=2.0)
    mi_bins: Optional[int] = Field(default=None, ge=2, le=64)
    min_beats: int = Field(default=AnalysisDefaults.MIN_BEATS, ge=3)
    weights: MetricWeights = Field(default_factory=MetricWeights)
    top_k: int = Field(default=AnalysisDefaults.TOP_K, ge=1)
    segments: Optional[list[str]] = None
    threads: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_windows(self) -> "RunConfig":
        """Interval parameters must be ordered."""
        if self.pair_max_ms <= self.pair_min_ms:
            raise ValueError("pair_max_ms must exceed pair_min_ms")
        if self.rri_max_s <= self.rri_min_s:
            raise ValueError("rri_max_s must exceed rri_min_s")
        if self.onset_window_ms < self.smoothing_window_ms:
            raise ValueError("onset_window_ms must not be narrower than smoothing_window_ms")
        if self.segments is not None and not self.segments:
            raise ValueError("segments, when given, must name at least one segment")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """
        Load a run configuration from a JSON file.

        Raises:
            ConfigError: If the file is unreadable, not JSON, or fails validation.
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read run config {path}: {exc}") from exc
        return cls.from_mapping(raw, source=str(path))

    @classmethod
    def from_mapping(cls, raw: object, *, source: str = "<mapping>") -> "RunConfig":
        """Validate a mapping, converting validation failures to ConfigError."""
        if not isinstance(raw, dict):
            raise ConfigError(f"run config {source} must be a JSON object")
        try:
            return cls.model_validate(raw)
        except ValidationError as exc:
            raise ConfigError(f"invalid run config {source}: {exc}") from exc

    def resolve_threads(self) -> int:
        """
        Thread cap for per-cell fan-out: explicit setting, then env var, then cores.

        Raises:
            ConfigError: If PULSEFEAT_THREADS is set but not a positive integer.
        """
        if self.threads is not None:
            return self.threads
        raw = os.environ.get(AnalysisDefaults.THREADS_ENV)
        if raw is not None and raw.strip():
            try:
                value = int(raw)
            except ValueError as exc:
                raise ConfigError(f"{AnalysisDefaults.THREADS_ENV} must be an integer") from exc
            if value < 1:
                raise ConfigError(f"{AnalysisDefaults.THREADS_ENV} must be >= 1")
            return value
        return os.cpu_count() or 1


# ============================================================================
# Example usage:
# ============================================================================
#
# from core.config import AnalysisDefaults, RunConfig
#
# config = RunConfig.from_file("run.json")     # unknown keys -> ConfigError
# config = RunConfig(cse_r=0.15, top_k=10)      # or in code
# window = AnalysisDefaults.SMOOTHING_WINDOW_MS
