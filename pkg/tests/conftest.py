import pytest

from spinx import potential as pot
from spinx.engine import PoleEngine
from spinx.siegert import SiegertSpec


@pytest.fixture(scope="session")
def khe_dataset():
    return pot.load_bundled_dataset()


@pytest.fixture(scope="session")
def engine(khe_dataset, tmp_path_factory):
    """Shared production-resolution pole engine; solves are cached on disk
    for the whole session so each channel is diagonalized once."""
    cache = tmp_path_factory.mktemp("pole_cache")
    return PoleEngine(khe_dataset, SiegertSpec(n_basis=200, a=40.0), cache_dir=cache)
