"""
Contract tests for schema compliance.

Ensures that ranking.json and comparison.json documents match
schemas/ranking.schema.json and schemas/comparison.schema.json.
"""

import json
from pathlib import Path

import jsonschema
import pytest

from association import AssociationResult, metric_agreement
from core.models import BPComponent, MetricWeights
from ranking import consistency, profile_similarity, rank_all
from storage.results import comparison_payload, ranking_payload, write_comparison, write_json, write_ranking


# Load schemas
SCHEMAS_DIR = Path(__file__).parent.parent.parent / "schemas"
RANKING_SCHEMA = json.loads((SCHEMAS_DIR / "ranking.schema.json").read_text())
COMPARISON_SCHEMA = json.loads((SCHEMAS_DIR / "comparison.schema.json").read_text())


@pytest.fixture
def small_assoc(make_cell) -> AssociationResult:
    cells = [
        make_cell(i, component, cc=0.1 * i * (-1) ** i, mi=0.08 * i, cse=1.0 - 0.1 * i)
        for i in range(1, 9)
        for component in (BPComponent.SBP, BPComponent.DBP)
    ]
    return AssociationResult.from_cells(cells)


@pytest.fixture
def ranking_doc(small_assoc) -> dict:
    return ranking_payload(
        record="subject01",
        rankings=rank_all(small_assoc),
        k=5,
        weights=MetricWeights(),
        agreement={c.value: metric_agreement(small_assoc, c) for c in BPComponent},
    )


# ============================================================================
# ranking.json
# ============================================================================

@pytest.mark.contract
class TestRankingSchema:
    """ranking.json must conform to ranking.schema.json."""

    def test_payload_against_schema(self, ranking_doc):
        try:
            jsonschema.validate(ranking_doc, RANKING_SCHEMA)
        except jsonschema.ValidationError as e:
            pytest.fail(f"Ranking schema validation failed: {e.message}")

    def test_payload_shape(self, ranking_doc):
        assert ranking_doc["components"]["SBP"]["n_ranked"] == 8
        assert len(ranking_doc["components"]["SBP"]["entries"]) == 5
        assert ranking_doc["components"]["PP"] == {"n_ranked": 0, "entries": []}
        assert ranking_doc["metric_agreement"]["PP"] == {"cc_mi": None, "cc_cse": None, "mi_cse": None}
        assert ranking_doc["segments"] == []

    def test_pipeline_payload_against_schema(self, study_result):
        doc = ranking_payload(
            record=study_result.record.name,
            rankings=study_result.rankings,
            k=study_result.config.top_k,
            weights=study_result.config.weights,
            agreement=study_result.summary.metric_agreement,
        )
        jsonschema.validate(doc, RANKING_SCHEMA)

    def test_rejects_extra_fields(self, ranking_doc):
        ranking_doc["generated_at"] = "2025-01-01T00:00:00Z"
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(ranking_doc, RANKING_SCHEMA)

    def test_rejects_unknown_component(self, ranking_doc):
        ranking_doc["components"]["HR"] = {"n_ranked": 0, "entries": []}
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(ranking_doc, RANKING_SCHEMA)

    def test_rejects_out_of_range_index(self, ranking_doc):
        ranking_doc["components"]["SBP"]["entries"][0]["feature_index"] = 223
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(ranking_doc, RANKING_SCHEMA)

    def test_writer_validates(self, tmp_path, ranking_doc):
        paths = write_ranking(tmp_path, ranking_doc)
        assert [p.name for p in paths] == ["ranking.json", "report.md"]
        assert json.loads(paths[0].read_text()) == ranking_doc
        report = paths[1].read_text()
        assert report.startswith("# Feature ranking: subject01")
        assert "## SBP" in report and "No populated cells." in report

        del ranking_doc["top_k"]
        with pytest.raises(ValueError, match="schema"):
            write_ranking(tmp_path / "bad", ranking_doc)
        assert not (tmp_path / "bad" / "ranking.json").exists()


# ============================================================================
# comparison.json
# ============================================================================

@pytest.mark.contract
class TestComparisonSchema:
    """comparison.json must conform to comparison.schema.json."""

    def test_payload_against_schema(self, tmp_path, make_cell):
        profiles = {
            "rest": AssociationResult.from_cells([make_cell(i, cc=0.1 * i) for i in range(1, 6)]),
            "drug": AssociationResult.from_cells([make_cell(i, cc=0.15 * i) for i in range(1, 5)]),
        }
        payload = comparison_payload(
            consistency(profiles, BPComponent.SBP),
            profile_similarity(profiles, BPComponent.SBP),
        )
        jsonschema.validate(payload, COMPARISON_SCHEMA)
        assert payload["incomplete"] == [5]
        assert payload["similarity"]["rest"]["drug"] == pytest.approx(1.0)
        path = write_comparison(tmp_path / "cmp.json", payload)
        assert json.loads(path.read_text())["labels"] == ["rest", "drug"]

    def test_requires_two_labels(self):
        doc = {
            "component": "SBP",
            "labels": ["only"],
            "min_abs_cc": 0.5,
            "rows": [],
            "incomplete": [],
            "similarity": {},
        }
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(doc, COMPARISON_SCHEMA)
        with pytest.raises(ValueError):
            write_json(Path("unused.json"), doc, COMPARISON_SCHEMA)
