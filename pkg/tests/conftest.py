import os

# allocation counters must be switched on before numba is first imported
os.environ.setdefault("NUMBA_NRT_STATS", "1")

import numpy as np  # noqa: E402
import pytest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
