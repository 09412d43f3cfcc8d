"""Borda fusion of the three association metrics into per-component rankings."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from association.sweep import AssociationResult
from core.errors import InvalidParameterError
from core.models import BPComponent, DiagnosticLog, MetricWeights, RankingEntry, RankingTable
from features.catalog import feature


def rank_features(
    assoc: AssociationResult,
    component: BPComponent,
    weights: MetricWeights | None = None,
    diagnostics: DiagnosticLog | None = None,
) -> RankingTable:
    """
    Rank every populated feature for one component.

    Three competition ranks ("min" method): |CC| descending, MI descending,
    CSE ascending. The score is their weighted sum, lower is better; ties go to
    the lower feature index. Ranks are taken on exact values, so any strictly
    monotone rescaling of a metric leaves the order unchanged.
    """
    weights = weights or MetricWeights()
    cells = assoc.for_component(component)
    if not cells:
        if diagnostics is not None:
            diagnostics.add(
                "ranking_empty",
                f"no populated association cells for {component.value}",
                component=component.value,
            )
        return RankingTable(component=component, entries=[], weights=weights)

    cc_rank = rankdata(-np.abs([c.cc for c in cells]), method="min").astype(int)
    mi_rank = rankdata(-np.asarray([c.mi_norm for c in cells]), method="min").astype(int)
    cse_rank = rankdata(np.asarray([c.cse_norm for c in cells]), method="min").astype(int)
    scores = weights.cc * cc_rank + weights.mi * mi_rank + weights.cse * cse_rank

    order = sorted(range(len(cells)), key=lambda n: (float(scores[n]), cells[n].feature_index))
    entries = [
        RankingEntry(
            position=position,
            feature_index=cells[n].feature_index,
            feature_name=feature(cells[n].feature_index).name,
            cc=cells[n].cc,
            cse_norm=cells[n].cse_norm,
            mi_norm=cells[n].mi_norm,
            cc_rank=int(cc_rank[n]),
            mi_rank=int(mi_rank[n]),
            cse_rank=int(cse_rank[n]),
            score=float(scores[n]),
        )
        for position, n in enumerate(order, start=1)
    ]
    return RankingTable(component=component, entries=entries, weights=weights)


def rank_all(
    assoc: AssociationResult,
    weights: MetricWeights | None = None,
    diagnostics: DiagnosticLog | None = None,
) -> dict[BPComponent, RankingTable]:
    """rank_features for all four components."""
    return {c: rank_features(assoc, c, weights, diagnostics) for c in BPComponent}


def top_k(table: RankingTable, k: int) -> RankingTable:
    """
    The first k rows, in order; the whole table when k exceeds its length.

    Raises:
        InvalidParameterError: If k < 1.
    """
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    return table.model_copy(update={"entries": list(table.entries[:k])})
