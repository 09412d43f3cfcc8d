"""Feature ranking and cross-profile consistency."""

from ranking.borda import rank_all, rank_features, top_k
from ranking.consistency import (
    ConsistencyReport,
    ConsistencyRow,
    consistency,
    profile_similarity,
)

__all__ = [
    "ConsistencyReport",
    "ConsistencyRow",
    "consistency",
    "profile_similarity",
    "rank_all",
    "rank_features",
    "top_k",
]
