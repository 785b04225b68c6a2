import numpy as np
import pytest

from app.core.config import settings
from app.schemas.asdm import TriggerTimes
from app.schemas.experiment import ExperimentConfig


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Send every artifact of a test into its own temporary directory."""
    monkeypatch.delenv("MEDS_OUTPUT_DIR", raising=False)
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path))
    return tmp_path


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def make_triggers():
    """Random strictly increasing trigger sets with gaps drawn from [low, high]."""
    def factory(rng, count, low=0.5, high=1.5, start=0.0):
        gaps = rng.uniform(low, high, count - 1)
        return TriggerTimes(times=np.concatenate([[start], start + np.cumsum(gaps)]).tolist())
    return factory


@pytest.fixture
def in_range_config():
    # amplitude below lambda: no folds, MEDS and the plain ASDM see the same input
    return ExperimentConfig(seed=3, amplitude=3.0, duration=0.1)


@pytest.fixture
def synthetic_config():
    return ExperimentConfig()
