"""Feature catalog and per-beat extraction."""

from features.catalog import (
    CATALOG,
    FAMILY_RANGES,
    FEATURE_COUNT,
    FeatureSpec,
    Family,
    dependents_of,
    family_slice,
    feature,
)
from features.families import (
    am_features,
    ar_features,
    pi_features,
    ptt_features,
    pulse_width,
    pw_features,
    ri_features,
    td_features,
)
from features.vector import FeatureVector, extract_all, feature_matrix

__all__ = [
    "CATALOG",
    "FAMILY_RANGES",
    "FEATURE_COUNT",
    "Family",
    "FeatureSpec",
    "FeatureVector",
    "am_features",
    "ar_features",
    "dependents_of",
    "extract_all",
    "family_slice",
    "feature",
    "feature_matrix",
    "pi_features",
    "ptt_features",
    "pulse_width",
    "pw_features",
    "ri_features",
    "td_features",
]
