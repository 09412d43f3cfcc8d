"""Unit tests for Borda ranking and cross-profile consistency."""

from __future__ import annotations

import numpy as np
import pytest

from association import AssociationResult
from core.errors import InvalidInputError, InvalidParameterError
from core.models import BPComponent, DiagnosticLog, MetricWeights
from ranking import consistency, profile_similarity, rank_all, rank_features, top_k


@pytest.fixture
def three_cells(make_cell) -> AssociationResult:
    return AssociationResult.from_cells(
        [
            make_cell(1, cc=0.9, mi=0.8, cse=0.2),
            make_cell(2, cc=-0.5, mi=0.9, cse=0.3),
            make_cell(3, cc=0.1, mi=0.1, cse=0.9),
        ]
    )


# ============================================================================
# Borda ranking
# ============================================================================

@pytest.mark.unit
class TestRankFeatures:
    """Competition ranks fused by weighted sum."""

    def test_worked_example(self, three_cells):
        table = rank_features(three_cells, BPComponent.SBP)
        assert [e.feature_index for e in table.entries] == [1, 2, 3]
        assert [(e.cc_rank, e.mi_rank, e.cse_rank) for e in table.entries] == [(1, 2, 1), (2, 1, 2), (3, 3, 3)]
        assert [e.score for e in table.entries] == [4.0, 5.0, 9.0]
        assert [e.position for e in table.entries] == [1, 2, 3]
        assert table.entries[0].feature_name == "PTT_1"

    def test_negative_cc_ranks_by_magnitude(self, make_cell):
        result = AssociationResult.from_cells([make_cell(1, cc=0.3), make_cell(2, cc=-0.95)])
        table = rank_features(result, BPComponent.SBP, MetricWeights(cc=1.0, mi=0.0, cse=0.0))
        assert [e.feature_index for e in table.entries] == [2, 1]

    def test_ties_go_to_lower_index(self, make_cell):
        result = AssociationResult.from_cells(
            [make_cell(7, cc=0.9, mi=0.1, cse=0.5), make_cell(3, cc=0.1, mi=0.9, cse=0.5)]
        )
        table = rank_features(result, BPComponent.SBP)
        assert [e.score for e in table.entries] == [4.0, 4.0]
        assert [e.feature_index for e in table.entries] == [3, 7]

    def test_equal_values_share_min_rank(self, make_cell):
        result = AssociationResult.from_cells(
            [make_cell(1, cc=0.5), make_cell(2, cc=-0.5), make_cell(3, cc=0.2)]
        )
        table = rank_features(result, BPComponent.SBP)
        assert sorted(e.cc_rank for e in table.entries) == [1, 1, 3]

    def test_monotone_rescaling_keeps_order(self, make_cell):
        rng = np.random.default_rng(0)
        values = rng.uniform(0.05, 0.95, size=(20, 3))
        plain = [make_cell(i + 1, cc=v[0], mi=v[1], cse=v[2]) for i, v in enumerate(values)]
        squashed = [
            make_cell(i + 1, cc=v[0] ** 3, mi=np.sqrt(v[1]), cse=v[2] ** 2) for i, v in enumerate(values)
        ]
        first = rank_features(AssociationResult.from_cells(plain), BPComponent.SBP)
        second = rank_features(AssociationResult.from_cells(squashed), BPComponent.SBP)
        assert [e.feature_index for e in first.entries] == [e.feature_index for e in second.entries]

    def test_weights_select_metric(self, three_cells):
        table = rank_features(three_cells, BPComponent.SBP, MetricWeights(cc=0.0, mi=1.0, cse=0.0))
        assert [e.feature_index for e in table.entries] == [2, 1, 3]

    def test_empty_component(self, three_cells):
        diagnostics = DiagnosticLog()
        tables = rank_all(three_cells, diagnostics=diagnostics)
        assert tables[BPComponent.SBP].k == 3
        assert tables[BPComponent.PP].entries == []
        assert diagnostics.codes() == ["ranking_empty"] * 3

    def test_top_k(self, three_cells):
        table = rank_features(three_cells, BPComponent.SBP)
        assert [e.feature_index for e in top_k(table, 2).entries] == [1, 2]
        assert top_k(table, 10).k == 3
        assert table.k == 3
        with pytest.raises(InvalidParameterError):
            top_k(table, 0)


# ============================================================================
# Consistency
# ============================================================================

@pytest.fixture
def profiles(make_cell) -> dict[str, AssociationResult]:
    return {
        "rest": AssociationResult.from_cells(
            [make_cell(1, cc=0.8), make_cell(2, cc=0.8), make_cell(3, cc=0.3), make_cell(4, cc=0.6)]
        ),
        "drug": AssociationResult.from_cells(
            [make_cell(1, cc=0.7), make_cell(2, cc=-0.7), make_cell(3, cc=0.4)]
        ),
        "scaled": AssociationResult.from_cells(
            [make_cell(1, cc=0.4), make_cell(2, cc=0.4), make_cell(3, cc=0.15), make_cell(4, cc=0.3)]
        ),
    }


@pytest.mark.unit
class TestConsistency:
    """Sign and strength of CC across profiles."""

    def test_rows_and_order(self, profiles):
        report = consistency({k: profiles[k] for k in ("rest", "drug")}, BPComponent.SBP)
        assert report.labels == ["rest", "drug"]
        assert [row.feature_index for row in report.rows] == [1, 2, 3]
        assert report.consistent_features == [1]
        assert not report.rows[1].sign_consistent
        assert report.rows[2].sign_consistent and not report.rows[2].consistent
        assert report.rows[0].min_abs_cc == 0.7
        assert report.incomplete == [4]

    def test_threshold(self, profiles):
        report = consistency({k: profiles[k] for k in ("rest", "drug")}, BPComponent.SBP, min_abs_cc=0.25)
        assert report.consistent_features == [1, 3]

    def test_needs_two_profiles(self, profiles):
        with pytest.raises(InvalidInputError):
            consistency({"rest": profiles["rest"]}, BPComponent.SBP)

    def test_profile_similarity(self, profiles):
        matrix = profile_similarity(profiles, BPComponent.SBP)
        assert matrix["rest"]["rest"] == 1.0
        assert matrix["rest"]["scaled"] == pytest.approx(1.0)
        assert matrix["rest"]["drug"] == pytest.approx(matrix["drug"]["rest"])
        assert matrix["drug"]["rest"] < 0.5

    def test_similarity_needs_shared_features(self, make_cell):
        few = {
            "a": AssociationResult.from_cells([make_cell(1, cc=0.2), make_cell(2, cc=0.4)]),
            "b": AssociationResult.from_cells([make_cell(1, cc=0.3), make_cell(2, cc=0.1)]),
        }
        assert profile_similarity(few, BPComponent.SBP)["a"]["b"] is None
