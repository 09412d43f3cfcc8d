"""
Pairwise association metrics between a feature series and a BP series.

- pearson: linear correlation
- cross_sample_entropy: synchrony of standardized series, bounded to [0, 1]
- mutual_information: equal-frequency binned MI, normalized by the smaller entropy
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import entropy, pearsonr, rankdata

from core.config import AnalysisDefaults
from core.errors import DegenerateSeriesError, InvalidInputError, InvalidParameterError
from core.models import DiagnosticLog
from waveform.filters import zscore

# Rows of the template-distance matrix computed at once.
_CSE_CHUNK = 512


def _pair(x: np.ndarray, y: np.ndarray, minimum: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise InvalidInputError(f"series must be 1-D and of equal length, got {a.shape} and {b.shape}")
    if a.size < minimum:
        raise InvalidInputError(f"series need at least {minimum} values, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("series must be finite")
    return a, b


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """
    Sample Pearson correlation in [-1, 1].

    Raises:
        InvalidInputError: Unequal lengths or fewer than 3 values.
        DegenerateSeriesError: Either series is constant.
    """
    a, b = _pair(x, y, 3)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateSeriesError("pearson is undefined for a constant series")
    return float(np.clip(pearsonr(a, b).statistic, -1.0, 1.0))


def _count_matches(x_templates: np.ndarray, y_templates: np.ndarray, m: int, r_tol: float) -> tuple[int, int]:
    """Template pairs within r_tol (Chebyshev) for lengths m and m+1, all index pairs."""
    matches_m = 0
    matches_m1 = 0
    for start in range(0, x_templates.shape[0], _CSE_CHUNK):
        block = x_templates[start : start + _CSE_CHUNK]
        dist = np.zeros((block.shape[0], y_templates.shape[0]))
        for k in range(m):
            np.maximum(dist, np.abs(block[:, k, None] - y_templates[None, :, k]), out=dist)
        close = dist <= r_tol
        matches_m += int(np.count_nonzero(close))
        last = np.abs(block[:, m, None] - y_templates[None, :, m])
        matches_m1 += int(np.count_nonzero(close & (last <= r_tol)))
    return matches_m, matches_m1


def cross_sample_entropy(
    x: np.ndarray,
    y: np.ndarray,
    m: int = AnalysisDefaults.CSE_M,
    r_tol: float = AnalysisDefaults.CSE_R,
) -> tuple[float, float]:
    """
    Cross-sample entropy of two series, raw and normalized to [0, 1].

    Both series are standardized first. N - m templates are used for both
    lengths m and m + 1, so the count is symmetric in (x, y). Without any match
    the raw value is ln((N - m)^2), the largest value the statistic can take,
    and the normalized value is raw / ln((N - m)^2).

    Raises:
        InvalidInputError: If N < m + 2 or the lengths differ.
        InvalidParameterError: If m < 1 or r_tol <= 0.
        DegenerateSeriesError: If either series is constant.
    """
    if m < 1 or r_tol <= 0:
        raise InvalidParameterError(f"need m >= 1 and r_tol > 0, got m={m}, r_tol={r_tol}")
    a, b = _pair(x, y, m + 2)
    n_templates = a.size - m
    xt = sliding_window_view(zscore(a), m + 1)
    yt = sliding_window_view(zscore(b), m + 1)
    matches_m, matches_m1 = _count_matches(xt, yt, m, r_tol)
    ceiling = math.log(float(n_templates) * float(n_templates))
    if matches_m == 0 or matches_m1 == 0:
        raw = ceiling
    else:
        raw = -math.log(matches_m1 / matches_m)
    return raw, float(min(max(raw / ceiling, 0.0), 1.0))


def default_bins(n: int) -> int:
    """floor(sqrt(N)) capped at 16 and at N/4."""
    return max(2, min(int(math.isqrt(n)), AnalysisDefaults.MI_MAX_BINS, n // 4))


def _edges(n: int, bins: int) -> np.ndarray:
    """
    Rank positions where each bin after the first starts.

    The lower half is rounded from k * n / bins and the upper half mirrors it,
    so reversing the order of the values reverses the bins. The split is exact
    unless n is odd and bins even.
    """
    lower = np.floor(np.arange(1, (bins + 1) // 2) * n / bins + 0.5).astype(np.int64)
    middle = [n // 2] if bins % 2 == 0 else []
    return np.concatenate([lower, np.asarray(middle, dtype=np.int64), n - lower[::-1]])


def _codes(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency bin codes from min-ranks, re-indexed to consecutive integers."""
    ranks = rankdata(values, method="min").astype(np.int64)
    codes = np.searchsorted(_edges(values.size, bins), ranks - 1, side="right")
    return np.unique(codes, return_inverse=True)[1].reshape(-1)


def mutual_information(
    x: np.ndarray,
    y: np.ndarray,
    bins: int | None = None,
    diagnostics: DiagnosticLog | None = None,
) -> tuple[float, float]:
    """
    Mutual information (nats) and its normalization by min(H(x), H(y)).

    Each series is cut into `bins` equal-frequency cells by rank, so the result
    is unchanged by any strictly increasing transform of either series, and by
    a strictly decreasing one whenever the bins split the values evenly. Ties
    that collapse cells are reported as `mi_bins_merged`.

    Raises:
        InvalidInputError: If fewer than 4 values per bin are available.
        DegenerateSeriesError: If either series is constant.
    """
    a, b = _pair(x, y, 2)
    n = a.size
    if bins is None:
        bins = default_bins(n)
    if bins < 2:
        raise InvalidParameterError(f"mutual information needs at least 2 bins, got {bins}")
    if n < 4 * bins:
        raise InvalidInputError(f"{n} values are too few for {bins} bins (need {4 * bins})")
    cx = _codes(a, bins)
    cy = _codes(b, bins)
    nx = int(cx.max()) + 1
    ny = int(cy.max()) + 1
    if diagnostics is not None and (nx < bins or ny < bins):
        diagnostics.add(
            "mi_bins_merged",
            f"ties reduced {bins} bins to {nx} x {ny}",
            requested=bins,
            x_bins=nx,
            y_bins=ny,
        )
    joint = np.bincount(cx * ny + cy, minlength=nx * ny)
    h_x = float(entropy(np.bincount(cx)))
    h_y = float(entropy(np.bincount(cy)))
    if min(h_x, h_y) <= 0:
        raise DegenerateSeriesError("mutual information is undefined for a constant series")
    raw = max(h_x + h_y - float(entropy(joint[joint > 0])), 0.0)
    return raw, float(min(raw / min(h_x, h_y), 1.0))
