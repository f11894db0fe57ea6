import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from grassfire import HyperspectralMovie


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def small_movie(rng):
    """Seeded 6-frame 9x12 movie with 4 bands and wavelengths."""
    values = rng.normal(10.0, 1.0, (6, 9, 12, 4)).astype(np.float32)
    return HyperspectralMovie(values, np.linspace(8.0, 11.0, 4))


@pytest.fixture
def square_matrix():
    """Unit square corners: sides 1, diagonals sqrt(2)."""
    s = np.sqrt(2.0)
    return np.array(
        [
            [0.0, 1.0, s, 1.0],
            [1.0, 0.0, 1.0, s],
            [s, 1.0, 0.0, 1.0],
            [1.0, s, 1.0, 0.0],
        ]
    )


@pytest.fixture
def three_point_matrix():
    """d01=1, d02=2, d12=3: the hand-run union-find fixture."""
    return np.array(
        [
            [0.0, 1.0, 2.0],
            [1.0, 0.0, 3.0],
            [2.0, 3.0, 0.0],
        ]
    )
