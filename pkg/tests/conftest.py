import numpy as np
import pytest

from subspectral import Kernel, build_reference, uniform_box

UNIT = uniform_box([0.0], [1.0])
ABEL = Kernel("abel_l1", 1.0)


@pytest.fixture(scope="session")
def abel_ref_2000():
    """The default reference: l1-exponential kernel, uniform unit interval."""
    return build_reference(ABEL, UNIT, 2000)


@pytest.fixture(scope="session")
def abel_ref_1000():
    return build_reference(ABEL, UNIT, 1000)


@pytest.fixture(scope="session")
def abel_ref_300():
    return build_reference(ABEL, UNIT, 300)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
