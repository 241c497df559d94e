import numpy as np
import pytest

from tumorhist.volume import NormalizedVolume, Volume3

# Acceptance outcomes, filled by tests/test_acceptance.py and echoed at the end.
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k)):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_normalized(rng, dims, excluded_frac=0.3, roles=("LR", "AP", "SI")):
    """Random normalized volume with some excluded voxels and exact edge values."""
    data = rng.random(dims)
    flat = data.ravel()
    if flat.size >= 4:
        flat[:4] = [0.0, 1.0, 0.5, 1.0 / 64]
    data[rng.random(dims) < excluded_frac] = -1.0
    return NormalizedVolume(data, roles)


def make_volume(data, roles=("LR", "AP", "SI")):
    return Volume3(np.asarray(data, dtype=np.float64), roles)
