import numpy as np
import pytest


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260816)


@pytest.fixture(scope="session")
def default_coupling():
    from vcselrc import build_doe_coupling

    return build_doe_coupling()
