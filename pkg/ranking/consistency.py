"""
Agreement of association profiles across conditions or records.

A profile is one AssociationResult: a record segment (rest, drug, rest) or a
whole record of one subject. A feature is consistent when its CC keeps one sign
and stays strong in every profile.
"""

from __future__ import annotations

from typing import Mapping, Optional

import numpy as np
from pydantic import BaseModel, Field

from association.metrics import pearson
from association.sweep import AssociationResult
from core.config import AnalysisDefaults
from core.errors import DegenerateSeriesError, InvalidInputError
from core.models import BPComponent
from features.catalog import FEATURE_COUNT, feature


class ConsistencyRow(BaseModel):
    """One feature's CC across profiles."""

    feature_index: int = Field(ge=1, le=FEATURE_COUNT)
    feature_name: str
    cc: dict[str, float]
    min_abs_cc: float
    sign_consistent: bool
    consistent: bool


class ConsistencyReport(BaseModel):
    """Consistency of every feature for one component."""

    component: BPComponent
    labels: list[str]
    min_abs_cc: float
    rows: list[ConsistencyRow] = Field(default_factory=list)
    incomplete: list[int] = Field(default_factory=list)

    @property
    def consistent_features(self) -> list[int]:
        """Indices of consistent features in report order."""
        return [row.feature_index for row in self.rows if row.consistent]


def consistency(
    profiles: Mapping[str, AssociationResult],
    component: BPComponent,
    min_abs_cc: float = AnalysisDefaults.CONSISTENCY_MIN_ABS_CC,
) -> ConsistencyReport:
    """
    Compare per-feature CC across two or more profiles.

    Rows cover features populated in every profile and are sorted consistent
    first, then by smallest |CC| descending, then by index. Features populated
    in only some profiles are listed as incomplete.

    Raises:
        InvalidInputError: With fewer than two profiles.
    """
    if len(profiles) < 2:
        raise InvalidInputError("consistency needs at least two profiles")
    labels = list(profiles)
    rows: list[ConsistencyRow] = []
    incomplete: list[int] = []
    for index in range(1, FEATURE_COUNT + 1):
        cells = {label: profiles[label].cell(index, component) for label in labels}
        present = {label: cell for label, cell in cells.items() if cell is not None}
        if not present:
            continue
        if len(present) < len(labels):
            incomplete.append(index)
            continue
        cc = {label: cell.cc for label, cell in present.items()}
        signs = {np.sign(value) for value in cc.values()}
        sign_consistent = len(signs) == 1 and 0 not in signs
        smallest = min(abs(value) for value in cc.values())
        rows.append(
            ConsistencyRow(
                feature_index=index,
                feature_name=feature(index).name,
                cc=cc,
                min_abs_cc=smallest,
                sign_consistent=sign_consistent,
                consistent=sign_consistent and smallest >= min_abs_cc,
            )
        )
    rows.sort(key=lambda row: (not row.consistent, -row.min_abs_cc, row.feature_index))
    return ConsistencyReport(
        component=component,
        labels=labels,
        min_abs_cc=min_abs_cc,
        rows=rows,
        incomplete=incomplete,
    )


def profile_similarity(
    profiles: Mapping[str, AssociationResult],
    component: BPComponent,
) -> dict[str, dict[str, Optional[float]]]:
    """
    Pearson correlation between the CC-versus-feature profiles of each pair.

    Uses features populated in both profiles; None when fewer than three are
    shared or a profile is flat.
    """
    labels = list(profiles)
    matrix: dict[str, dict[str, Optional[float]]] = {label: {} for label in labels}
    for left in labels:
        for right in labels:
            if left == right:
                matrix[left][right] = 1.0
                continue
            shared = [
                (a.cc, b.cc)
                for index in range(1, FEATURE_COUNT + 1)
                if (a := profiles[left].cell(index, component)) is not None
                and (b := profiles[right].cell(index, component)) is not None
            ]
            value: Optional[float] = None
            if len(shared) >= 3:
                x, y = np.asarray(shared).T
                try:
                    value = pearson(x, y)
                except DegenerateSeriesError:
                    value = None
            matrix[left][right] = value
    return matrix
