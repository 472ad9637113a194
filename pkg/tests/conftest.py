import pytest

from czpulse.hamiltonian import calibrate_device


@pytest.fixture(scope="session")
def device():
    """One calibrated reference device shared across the whole suite."""
    return calibrate_device()
