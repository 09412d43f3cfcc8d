"""
The 222-entry feature catalog.

Index ranges (1-based, inclusive):

    PTT   1-10    R peak to FP1..FP10
    TD   11-66    RRI, then FP_j - FP_i for the 55 pairs i<j
    PW   67-76    widths at 50/60/70% amplitude and at FP2,3,4,6,7,8,9 levels
    AM   77-131   PPG(FP_j) - PPG(FP_i) for the 55 pairs
    PI  132-150   PPG at FP1..FP10, dPPG at FP1,3,8, sdPPG at FP2,4,7,8,9,10
    AR  151-204   baseline-anchored area for the 55 pairs except (FP1, FP11)
    RI  205-222   relative indices
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

from core.errors import InvalidInputError
from fiducials.points import FIDUCIAL_COUNT, FIDUCIAL_NAMES

FEATURE_COUNT = 222
R_PEAK = "R_peak"


class Family(str, Enum):
    """Feature families in index order."""

    PTT = "PTT"
    TD = "TD"
    PW = "PW"
    AM = "AM"
    PI = "PI"
    AR = "AR"
    RI = "RI"


FAMILY_RANGES: dict[Family, tuple[int, int]] = {
    Family.PTT: (1, 10),
    Family.TD: (11, 66),
    Family.PW: (67, 76),
    Family.AM: (77, 131),
    Family.PI: (132, 150),
    Family.AR: (151, 204),
    Family.RI: (205, 222),
}

FIDUCIAL_PAIRS: tuple[tuple[int, int], ...] = tuple(combinations(range(1, FIDUCIAL_COUNT + 1), 2))
AREA_PAIRS: tuple[tuple[int, int], ...] = tuple(p for p in FIDUCIAL_PAIRS if p != (1, FIDUCIAL_COUNT))
PW_LEVELS: tuple[float, ...] = (0.5, 0.6, 0.7)
PW_FIDUCIAL_LEVELS: tuple[int, ...] = (2, 3, 4, 6, 7, 8, 9)
PI_PPG_POINTS: tuple[int, ...] = tuple(range(1, 11))
PI_DPPG_POINTS: tuple[int, ...] = (1, 3, 8)
PI_SDPPG_POINTS: tuple[int, ...] = (2, 4, 7, 8, 9, 10)


def fp(k: int) -> str:
    """Dependency label of fiducial k."""
    return f"FP{k}"


@dataclass(frozen=True)
class FeatureSpec:
    """One catalog row."""

    index: int
    family: Family
    name: str
    description: str
    dependencies: frozenset[str]
    units: str

    @property
    def fiducials(self) -> frozenset[int]:
        """Fiducial numbers this feature depends on."""
        return frozenset(int(dep[2:]) for dep in self.dependencies if dep.startswith("FP"))


# (name, description, fiducial dependencies, uses R peak, units)
_RI_ROWS: tuple[tuple[str, str, tuple[int, ...], bool, str], ...] = (
    ("RI_relative_rising_time", "(t5 - t1) / RRI", (1, 5), True, "1"),
    ("RI_crest_time_ratio", "(t5 - t1) / (t11 - t1)", (1, 5, 11), False, "1"),
    ("RI_relative_dicrotic_time", "(t9 - t1) / RRI", (1, 9), True, "1"),
    ("RI_dicrotic_vertical_position", "(PPG9 - PPG1) / A", (1, 5, 9), False, "1"),
    ("RI_dicrotic_diastolic_ratio", "PPG9 / PPG5 above the FP1-FP11 baseline", (1, 5, 9, 11), False, "1"),
    ("RI_augmentation_index", "(PPG5 - PPG6) / A", (1, 5, 6), False, "1"),
    ("RI_inflection_point_area_ratio", "AR(9,11) / AR(1,9)", (1, 9, 11), False, "1"),
    ("RI_slope_transit_time", "A / dPPG(FP3)", (1, 3, 5), False, "s"),
    ("RI_b_a", "sdPPG b / a", (2, 4), False, "1"),
    ("RI_c_a", "sdPPG c / a", (2, 6), False, "1"),
    ("RI_d_a", "sdPPG d / a", (2, 7), False, "1"),
    ("RI_e_a", "sdPPG e / a", (2, 9), False, "1"),
    ("RI_c_plus_d_minus_b_a", "(c + d - b) / a", (2, 4, 6, 7), False, "1"),
    ("RI_b_minus_c_minus_d_a", "(b - c - d) / a", (2, 4, 6, 7), False, "1"),
    ("RI_aging_index", "(b - c - d - e) / a", (2, 4, 6, 7, 9), False, "1"),
    ("RI_ppg_intensity_ratio", "PPG5 / PPG1 (DC preserved)", (1, 5), False, "1"),
    ("RI_perfusion_index", "100 * A / mean raw PPG over the beat", (1, 5, 11), False, "%"),
    ("RI_reflection_index", "(max PPG after FP9 - PPG1) / A", (1, 5, 9, 11), False, "1"),
)


def _deps(points: tuple[int, ...] | list[int], r_peak: bool = False) -> frozenset[str]:
    labels = {fp(k) for k in points}
    if r_peak:
        labels.add(R_PEAK)
    return frozenset(labels)


def _build() -> tuple[FeatureSpec, ...]:
    rows: list[tuple[Family, str, str, frozenset[str], str]] = []

    for k in range(1, 11):
        rows.append(
            (Family.PTT, f"PTT_{k}", f"R peak to {FIDUCIAL_NAMES[k - 1]}", _deps([k], True), "s")
        )

    rows.append((Family.TD, "RRI", "R-R interval", frozenset({R_PEAK}), "s"))
    for i, j in FIDUCIAL_PAIRS:
        rows.append(
            (
                Family.TD,
                f"TD_{i}_{j}",
                f"time from {FIDUCIAL_NAMES[i - 1]} to {FIDUCIAL_NAMES[j - 1]}",
                _deps([i, j]),
                "s",
            )
        )

    for level in PW_LEVELS:
        pct = int(round(level * 100))
        rows.append((Family.PW, f"PW{pct}", f"pulse width at {pct}% amplitude", _deps([1, 5, 11]), "s"))
    for k in PW_FIDUCIAL_LEVELS:
        rows.append(
            (
                Family.PW,
                f"PW_FP{k}",
                f"pulse width at the level of {FIDUCIAL_NAMES[k - 1]}",
                _deps([1, 5, 11, k]),
                "s",
            )
        )

    for i, j in FIDUCIAL_PAIRS:
        rows.append(
            (
                Family.AM,
                f"AM_{i}_{j}",
                f"amplitude from {FIDUCIAL_NAMES[i - 1]} to {FIDUCIAL_NAMES[j - 1]}",
                _deps([i, j]),
                "a.u.",
            )
        )

    for k in PI_PPG_POINTS:
        rows.append((Family.PI, f"PI_PPG_FP{k}", f"PPG at {FIDUCIAL_NAMES[k - 1]}", _deps([k]), "a.u."))
    for k in PI_DPPG_POINTS:
        rows.append((Family.PI, f"PI_dPPG_FP{k}", f"dPPG at {FIDUCIAL_NAMES[k - 1]}", _deps([k]), "a.u./s"))
    for k in PI_SDPPG_POINTS:
        rows.append(
            (Family.PI, f"PI_sdPPG_FP{k}", f"sdPPG at {FIDUCIAL_NAMES[k - 1]}", _deps([k]), "a.u./s^2")
        )

    for i, j in AREA_PAIRS:
        rows.append(
            (
                Family.AR,
                f"AR_{i}_{j}",
                f"area above PPG(FP1) from {FIDUCIAL_NAMES[i - 1]} to {FIDUCIAL_NAMES[j - 1]}",
                _deps([1, i, j]),
                "a.u.*s",
            )
        )

    for name, description, points, r_peak, units in _RI_ROWS:
        rows.append((Family.RI, name, description, _deps(points, r_peak), units))

    return tuple(
        FeatureSpec(index=n, family=family, name=name, description=desc, dependencies=deps, units=units)
        for n, (family, name, desc, deps, units) in enumerate(rows, start=1)
    )


CATALOG: tuple[FeatureSpec, ...] = _build()
_BY_NAME: dict[str, FeatureSpec] = {spec.name: spec for spec in CATALOG}

assert len(CATALOG) == FEATURE_COUNT, "catalog must hold exactly 222 features"
assert all(
    FAMILY_RANGES[spec.family][0] <= spec.index <= FAMILY_RANGES[spec.family][1] for spec in CATALOG
), "catalog family ranges drifted"


def feature(key: int | str) -> FeatureSpec:
    """
    Look up a feature by 1-based index or name (e.g. 67 or "PW50").

    Raises:
        InvalidInputError: If no such feature exists.
    """
    if isinstance(key, int) and not isinstance(key, bool):
        if not 1 <= key <= FEATURE_COUNT:
            raise InvalidInputError(f"feature index {key} outside 1..{FEATURE_COUNT}")
        return CATALOG[key - 1]
    text = str(key).strip()
    if text.isdigit():
        return feature(int(text))
    try:
        return _BY_NAME[text]
    except KeyError as exc:
        raise InvalidInputError(f"unknown feature {key!r}") from exc


def family_slice(family: Family) -> slice:
    """0-based slice of a family inside a 222-value array."""
    lo, hi = FAMILY_RANGES[family]
    return slice(lo - 1, hi)


def dependents_of(*labels: str) -> frozenset[int]:
    """Indices of features depending on any of the given labels (e.g. "FP10")."""
    wanted = set(labels)
    return frozenset(spec.index for spec in CATALOG if spec.dependencies & wanted)
