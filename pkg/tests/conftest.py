import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make tests/oracles.py importable

from dimmax import OperatorDiscretization


@pytest.fixture(scope="session")
def disc():
    """One shared spectral discretization; branch matrices accumulate in its cache."""
    return OperatorDiscretization()


@pytest.fixture(scope="session")
def uniform_disc():
    return OperatorDiscretization(scheme="uniform_grid", resolution=400)
