import pytest

from clustermjd import SystemParams


@pytest.fixture
def table1() -> SystemParams:
    """Default benchmark scenario: M=4, K=5, n=6, alpha=0.5, gamma=20 dB."""
    return SystemParams.make()
