import pytest

from certification.dicke import DickeSpec, dicke_state
from certification.parent_ham import build_pauli
from job_system import JobRegistry


@pytest.fixture(autouse=True)
def isolated_jobs(tmp_path, monkeypatch):
    """Job cache and report output go to a per-test directory; the registry starts empty."""
    monkeypatch.setattr("job_system.base_job.CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setattr("job_system.jobs.certify_point_job.OUTPUT_DIR", str(tmp_path / "outputs"))
    JobRegistry.clear_registrations()
    JobRegistry.initialize()
    JobRegistry.clear_jobs()
    JobRegistry.set_broadcast_callback(None)
    yield
    JobRegistry.clear_jobs()


@pytest.fixture
def h2():
    return build_pauli(2, 1)


@pytest.fixture
def w2():
    return dicke_state(DickeSpec(2, 1))

