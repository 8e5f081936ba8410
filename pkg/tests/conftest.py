from fractions import Fraction

import pytest

from qmicro.config import get_settings
from qmicro.dos import density_of_states
from qmicro.spectrum import Spectrum, build_ising_chain, build_uniform_ladder, from_eigenvalues


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch, tmp_path):
    """Each test sees default settings, unaffected by a .env in the repo."""
    monkeypatch.chdir(tmp_path)
    for name in ("QMICRO_BACKING", "QMICRO_METRICS_DIR", "QMICRO_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def two_level():
    return density_of_states(build_uniform_ladder(1))


@pytest.fixture
def tent():
    return density_of_states(build_uniform_ladder(2))


@pytest.fixture
def four_level():
    return density_of_states(build_uniform_ladder(3))


@pytest.fixture
def degenerate_five():
    return density_of_states(from_eigenvalues([0, 1, 1, 2, 3], multiplicity_tolerance=0))


@pytest.fixture
def degenerate_ground():
    return density_of_states(Spectrum(((0, 2), (1, 1))))


@pytest.fixture
def ising():
    return density_of_states(build_ising_chain(Fraction(1, 4), 1))
