"""
Shared pytest fixtures and configuration for pulse-features tests.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from core.config import RunConfig
from core.models import AssociationCell, Beat, BPComponent
from core.pipeline import PipelineResult, run_pipeline
from fiducials.points import FiducialSet
from storage.records import Record
from synth.config import Coupling, DrugEffect, SynthConfig
from synth.generator import GroundTruth, generate_record
from waveform.signal import SampledSignal


# ============================================================================
# Fixtures: File Paths
# ============================================================================

@pytest.fixture
def schemas_dir() -> Path:
    """Path to schemas directory."""
    return Path(__file__).parent.parent / "schemas"


# ============================================================================
# Fixtures: Hand-built beats
# ============================================================================

@pytest.fixture
def gaussian_pulse() -> SampledSignal:
    """One Gaussian pulse (sigma 50 ms, peak at 0.5 s) on a unit baseline, 1000 Hz."""
    fs = 1000.0
    t = np.arange(1000) / fs
    return SampledSignal(1.0 + np.exp(-0.5 * ((t - 0.5) / 0.05) ** 2), fs, "ppg")


@pytest.fixture
def gaussian_beat() -> Beat:
    """Beat window spanning the Gaussian pulse."""
    return Beat(r_peak=50, onset=100, next_onset=900, rri=0.85)


@pytest.fixture
def gaussian_fiducials() -> FiducialSet:
    """Foot, peak and next foot of the Gaussian pulse."""
    return FiducialSet.from_points({1: 100, 5: 500, 11: 900})


def _cell(
    index: int,
    component: BPComponent = BPComponent.SBP,
    *,
    cc: float = 0.5,
    mi: float = 0.5,
    cse: float = 0.5,
    n_beats: int = 40,
) -> AssociationCell:
    """Association cell with the raw values set to the normalized ones."""
    return AssociationCell(
        feature_index=index,
        component=component,
        cc=cc,
        cse_raw=cse,
        cse_norm=cse,
        mi_raw=mi,
        mi_norm=mi,
        n_beats=n_beats,
    )


@pytest.fixture
def make_cell():
    """Factory for association cells: make_cell(index, component, cc=..., mi=..., cse=...)."""
    return _cell


# ============================================================================
# Fixtures: Synthetic records
# ============================================================================

Generated = tuple[SampledSignal, SampledSignal, SampledSignal, GroundTruth]


@pytest.fixture(scope="session")
def short_config() -> SynthConfig:
    """20 s record with the default pulse and couplings."""
    return SynthConfig(seed=3, duration_s=20.0)


@pytest.fixture(scope="session")
def short_record(short_config: SynthConfig) -> Generated:
    """Clean 20 s synthetic record."""
    return generate_record(short_config)


@pytest.fixture(scope="session")
def study_config() -> SynthConfig:
    """60 s record planting PW50 -> SBP and AM_3_4 -> DBP without noise."""
    return SynthConfig(seed=11, duration_s=60.0)


@pytest.fixture(scope="session")
def study_record(study_config: SynthConfig) -> Generated:
    """Clean 60 s synthetic study record."""
    return generate_record(study_config)


@pytest.fixture(scope="session")
def drug_config() -> SynthConfig:
    """
    120 s rest / nitroglycerin / rest record.

    One noisy PW50 -> SBP coupling whose gain triples inside the drug segment.
    """
    return SynthConfig(
        seed=5,
        duration_s=120.0,
        couplings=[Coupling(feature="PW50", component=BPComponent.SBP, gain=-0.03, noise_std=0.03)],
        drug=DrugEffect(coupling_gain_factor=3.0),
    )


@pytest.fixture(scope="session")
def drug_record(drug_config: SynthConfig) -> Generated:
    """Generated three-segment record."""
    return generate_record(drug_config)


def as_record(generated: Generated, name: str, *, with_abp: bool = True) -> Record:
    """Wrap generator output as a parsed record."""
    ecg, ppg, abp, truth = generated
    return Record(
        ecg=ecg,
        ppg=ppg,
        abp=abp if with_abp else None,
        segments=tuple(truth.segments),
        name=name,
    )


@pytest.fixture
def to_record():
    """Factory: to_record(generated, name, with_abp=True) -> Record."""
    return as_record


# ============================================================================
# Fixtures: Pipeline runs
# ============================================================================

@pytest.fixture(scope="session")
def study_result(study_record: Generated) -> PipelineResult:
    """Whole-record analysis of the study record."""
    return run_pipeline(as_record(study_record, "study"), RunConfig(threads=2), emit_events=False)


@pytest.fixture(scope="session")
def drug_result(drug_record: Generated) -> PipelineResult:
    """Per-segment analysis of the drug record."""
    config = RunConfig(threads=2, segments=[s.name for s in drug_record[3].segments])
    return run_pipeline(as_record(drug_record, "drug"), config, emit_events=False)


# ============================================================================
# Pytest Configuration
# ============================================================================

def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "contract: contract schema compliance tests")
    config.addinivalue_line("markers", "integration: end-to-end integration tests")
    config.addinivalue_line("markers", "unit: unit tests")
