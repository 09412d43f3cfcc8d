"""Feature-to-BP association metrics and the full sweep."""

from association.metrics import (
    cross_sample_entropy,
    default_bins,
    mutual_information,
    pearson,
)
from association.sweep import (
    COMPONENTS,
    AssociationResult,
    associate_all,
    associate_segments,
    average_results,
    metric_agreement,
)

__all__ = [
    "COMPONENTS",
    "AssociationResult",
    "associate_all",
    "associate_segments",
    "average_results",
    "cross_sample_entropy",
    "default_bins",
    "metric_agreement",
    "mutual_information",
    "pearson",
]
