"""Core module for pulse-features: models, configuration, errors."""

from core.config import AnalysisDefaults, RunConfig
from core.errors import (
    ConfigError,
    DataError,
    DegenerateSeriesError,
    ExitCode,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
    PulseFeatError,
    RecordParseError,
)
from core.models import (
    AssociationCell,
    Beat,
    BeatBP,
    BPComponent,
    Diagnostic,
    DiagnosticLog,
    MetricWeights,
    RankingEntry,
    RankingTable,
    RunStatus,
    RunSummary,
    Segment,
)

__all__ = [
    "AnalysisDefaults",
    "RunConfig",
    "ConfigError",
    "DataError",
    "DegenerateSeriesError",
    "ExitCode",
    "InsufficientDataError",
    "InvalidInputError",
    "InvalidParameterError",
    "PulseFeatError",
    "RecordParseError",
    "AssociationCell",
    "Beat",
    "BeatBP",
    "BPComponent",
    "Diagnostic",
    "DiagnosticLog",
    "MetricWeights",
    "RankingEntry",
    "RankingTable",
    "RunStatus",
    "RunSummary",
    "Segment",
]
