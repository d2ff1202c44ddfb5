from pathlib import Path

import pytest

from cmpmix.datasets import (
    hospital_days,
    icecream,
    sim_5pt,
    sim_10pt,
    sim_15pt_broad,
    sim_15pt_spike,
)
from cmpmix.types import EmConfig, GridSpec

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture
def ratings10():
    return sim_10pt()


@pytest.fixture
def counts5():
    return sim_5pt()


@pytest.fixture
def counts15_broad():
    return sim_15pt_broad()


@pytest.fixture
def counts15_spike():
    return sim_15pt_spike()


@pytest.fixture
def survey5():
    return icecream()


@pytest.fixture
def hospital15():
    return hospital_days()


@pytest.fixture(scope="session")
def fast_grid() -> GridSpec:
    """Coarser search for tests that exercise behavior, not paper parity."""
    return GridSpec(points_per_region=8, min_spacing=5e-3)


@pytest.fixture(scope="session")
def fast_config() -> EmConfig:
    return EmConfig(max_em_iterations=40)
