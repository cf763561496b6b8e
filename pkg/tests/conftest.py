import numpy as np
import pytest

from gappedmps.models import (four_corner_toy, ghz_tuple, pauli_tuple,
                              toy_classa, xz_tuple)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="session")
def ghz():
    return ghz_tuple()


@pytest.fixture(scope="session")
def pauli():
    return pauli_tuple()


@pytest.fixture(scope="session")
def xz():
    return xz_tuple()


@pytest.fixture(scope="session")
def toy():
    return toy_classa()


@pytest.fixture(scope="session")
def four_corner():
    return four_corner_toy()
