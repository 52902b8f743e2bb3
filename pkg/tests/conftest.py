import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from torusns import GridSpec


@pytest.fixture
def grid8():
    return GridSpec(modes_per_dim=8, viscosity=0.01)


@pytest.fixture
def grid16():
    return GridSpec(modes_per_dim=16, viscosity=0.01)


@pytest.fixture
def grid32():
    return GridSpec(modes_per_dim=32, viscosity=0.01)
