import numpy as np
import pytest

from modspin import modgauss as mg
from modspin import spin_models as sm
from modspin.numerics import constants


@pytest.fixture(scope="session")
def consts():
    return constants()


@pytest.fixture(scope="session")
def cw_descriptor():
    return mg.descriptor(sm.ModelSpec(sm.ModelKind.CURIE_WEISS, 1))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
