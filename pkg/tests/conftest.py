import pytest

import mblsim as m


@pytest.fixture(scope="session")
def device():
    return m.DeviceParams.default()


@pytest.fixture(scope="session")
def model(device):
    return m.derive_couplings(device)
