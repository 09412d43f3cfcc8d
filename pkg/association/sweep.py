"""The 222 x 4 association sweep and its per-segment variants."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from association.metrics import cross_sample_entropy, default_bins, mutual_information, pearson
from core.config import RunConfig
from core.errors import DegenerateSeriesError, InvalidInputError
from core.models import AssociationCell, Beat, BeatBP, BPComponent, DiagnosticLog
from features.catalog import FEATURE_COUNT
from features.vector import FeatureVector, feature_matrix

COMPONENTS: tuple[BPComponent, ...] = tuple(BPComponent)


@dataclass(frozen=True)
class AssociationResult:
    """
    Scores for every (feature index, BP component) cell that had enough beats.

    Absent keys are missing cells.
    """

    cells: Mapping[tuple[int, BPComponent], AssociationCell]
    diagnostics: DiagnosticLog = field(default_factory=DiagnosticLog, compare=False)

    def cell(self, index: int, component: BPComponent) -> Optional[AssociationCell]:
        """The cell for a feature and component, or None when missing."""
        return self.cells.get((index, component))

    def for_component(self, component: BPComponent) -> list[AssociationCell]:
        """Populated cells of one component in feature-index order."""
        return [
            self.cells[(i, component)]
            for i in range(1, FEATURE_COUNT + 1)
            if (i, component) in self.cells
        ]

    def ordered(self) -> list[AssociationCell]:
        """All populated cells by feature index, then component order."""
        return [
            self.cells[(i, c)]
            for i in range(1, FEATURE_COUNT + 1)
            for c in COMPONENTS
            if (i, c) in self.cells
        ]

    def __len__(self) -> int:
        return len(self.cells)

    @classmethod
    def from_cells(cls, cells: Iterable[AssociationCell]) -> "AssociationResult":
        """Index a collection of cells."""
        return cls({(c.feature_index, c.component): c for c in cells})


def _score_feature(
    index: int,
    column: np.ndarray,
    targets: Mapping[BPComponent, np.ndarray],
    usable: np.ndarray,
    config: RunConfig,
) -> tuple[list[AssociationCell], Counter]:
    cells: list[AssociationCell] = []
    notes: Counter = Counter()
    mask = usable & ~np.isnan(column)
    n = int(np.count_nonzero(mask))
    if n < config.min_beats:
        notes["cell_insufficient_beats"] += len(targets)
        return cells, notes
    x = column[mask]
    for component, series in targets.items():
        y = series[mask]
        merged = DiagnosticLog()
        try:
            cc = pearson(x, y)
            sign = -1.0 if cc < 0 else 1.0
            cse_raw, cse_norm = cross_sample_entropy(sign * x, y, config.cse_m, config.cse_r)
            bins = config.mi_bins if config.mi_bins is not None else default_bins(n)
            mi_raw, mi_norm = mutual_information(x, y, bins, diagnostics=merged)
        except DegenerateSeriesError:
            notes["degenerate_series"] += 1
            continue
        except InvalidInputError:
            notes["cell_insufficient_beats"] += 1
            continue
        notes.update(merged.codes())
        cells.append(
            AssociationCell(
                feature_index=index,
                component=component,
                cc=cc,
                cse_raw=cse_raw,
                cse_norm=cse_norm,
                mi_raw=mi_raw,
                mi_norm=mi_norm,
                n_beats=n,
            )
        )
    return cells, notes


_NOTE_MESSAGES = {
    "cell_insufficient_beats": "cells had too few usable beats and are missing",
    "degenerate_series": "cells had a constant feature or BP series and are missing",
    "mi_bins_merged": "cells had tied values that merged mutual-information bins",
}


def associate_all(
    features: Sequence[FeatureVector],
    bps: Sequence[BeatBP],
    config: RunConfig | None = None,
) -> AssociationResult:
    """
    Score every (feature, component) pair.

    Beats with a degenerate BP window are dropped for all cells; beats missing a
    feature are dropped for that feature only. Cells with fewer than
    `config.min_beats` beats are missing. For CSE the feature is multiplied by
    the sign of its CC, so inverse couplings also read as synchronized.

    Raises:
        InvalidInputError: If the feature and BP lists are not aligned.
    """
    config = config or RunConfig()
    if len(features) != len(bps):
        raise InvalidInputError(f"{len(features)} feature vectors but {len(bps)} BP beats")
    matrix = feature_matrix(list(features))
    usable = np.array([not bp.degenerate for bp in bps], dtype=bool)
    targets = {c: np.array([bp.component(c) for bp in bps], dtype=np.float64) for c in COMPONENTS}

    def work(index: int) -> tuple[list[AssociationCell], Counter]:
        return _score_feature(index, matrix[:, index - 1], targets, usable, config)

    with ThreadPoolExecutor(max_workers=config.resolve_threads()) as pool:
        outcomes = list(pool.map(work, range(1, FEATURE_COUNT + 1)))

    cells: list[AssociationCell] = []
    notes: Counter = Counter()
    for found, counted in outcomes:
        cells.extend(found)
        notes.update(counted)

    result = AssociationResult.from_cells(cells)
    for code in sorted(notes):
        result.diagnostics.add(code, f"{notes[code]} {_NOTE_MESSAGES.get(code, code)}", count=notes[code])
    return result


def associate_segments(
    features: Sequence[FeatureVector],
    bps: Sequence[BeatBP],
    beats: Sequence[Beat],
    segments: Sequence[str],
    config: RunConfig | None = None,
) -> dict[str, AssociationResult]:
    """One association per named segment, using the beats labeled with it."""
    if not len(features) == len(bps) == len(beats):
        raise InvalidInputError("features, BP and beats must be aligned")
    results: dict[str, AssociationResult] = {}
    for name in segments:
        chosen = [k for k, beat in enumerate(beats) if beat.segment == name]
        results[name] = associate_all(
            [features[k] for k in chosen],
            [bps[k] for k in chosen],
            config,
        )
    return results


def average_results(results: Mapping[str, AssociationResult]) -> AssociationResult:
    """
    Average per-segment results cell by cell.

    Each metric is the mean over the segments that have the cell; n_beats is
    their sum.
    """
    grouped: dict[tuple[int, BPComponent], list[AssociationCell]] = {}
    for result in results.values():
        for key, cell in result.cells.items():
            grouped.setdefault(key, []).append(cell)
    averaged = []
    for (index, component), group in grouped.items():
        averaged.append(
            AssociationCell(
                feature_index=index,
                component=component,
                cc=float(np.clip(np.mean([c.cc for c in group]), -1.0, 1.0)),
                cse_raw=float(np.mean([c.cse_raw for c in group])),
                cse_norm=float(np.clip(np.mean([c.cse_norm for c in group]), 0.0, 1.0)),
                mi_raw=float(np.mean([c.mi_raw for c in group])),
                mi_norm=float(np.clip(np.mean([c.mi_norm for c in group]), 0.0, 1.0)),
                n_beats=sum(c.n_beats for c in group),
            )
        )
    return AssociationResult.from_cells(averaged)


def metric_agreement(result: AssociationResult, component: BPComponent) -> dict[str, Optional[float]]:
    """
    Spearman correlation across features between |CC|, MI and CSE.

    Agreeing metrics give cc_mi > 0 and negative cc_cse / mi_cse. Values are
    None with fewer than 3 populated cells or a constant metric.
    """
    cells = result.for_component(component)
    columns = {
        "cc": np.array([abs(c.cc) for c in cells]),
        "mi": np.array([c.mi_norm for c in cells]),
        "cse": np.array([c.cse_norm for c in cells]),
    }
    out: dict[str, Optional[float]] = {}
    for left, right in (("cc", "mi"), ("cc", "cse"), ("mi", "cse")):
        value: Optional[float] = None
        if len(cells) >= 3 and np.ptp(columns[left]) > 0 and np.ptp(columns[right]) > 0:
            rho = float(spearmanr(columns[left], columns[right]).statistic)
            value = rho if np.isfinite(rho) else None
        out[f"{left}_{right}"] = value
    return out
