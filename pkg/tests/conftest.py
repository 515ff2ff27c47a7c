import numpy as np
import pytest

from spintomo import PhaseSpaceGrid, build_spin1_frame


@pytest.fixture(scope="session")
def frame():
    return build_spin1_frame()


@pytest.fixture(scope="session")
def grid64():
    return PhaseSpaceGrid.balanced(64)


@pytest.fixture(scope="session")
def grid128():
    return PhaseSpaceGrid.balanced(128)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
