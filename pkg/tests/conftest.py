import pytest

from clawex.forge import ScenarioSpec, generate_store
from clawex.store import load_evidence

from .utils import truth_settings


@pytest.fixture
def capture_time():
    return 1770019200000  # 2026-02-02T08:00:00Z


@pytest.fixture(scope="session")
def full_store(tmp_path_factory):
    """A pristine full-scenario store, shared read-only across tests."""
    dest = tmp_path_factory.mktemp("full")
    truth = generate_store(str(dest), ScenarioSpec.full(), seed=7)
    return str(dest), truth


@pytest.fixture(scope="session")
def full_evidence(full_store):
    dest, truth = full_store
    return load_evidence(dest, settings=truth_settings(truth))


@pytest.fixture
def minimal_store(tmp_path):
    truth = generate_store(str(tmp_path), ScenarioSpec.minimal(), seed=1)
    return str(tmp_path), truth


@pytest.fixture
def fresh_store(tmp_path):
    """A full-scenario store the test may damage."""
    truth = generate_store(str(tmp_path), ScenarioSpec.full(), seed=11)
    return str(tmp_path), truth
