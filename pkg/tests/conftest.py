import numpy as np
import pytest

from raydamp.profiles import build_profile, sqrt_coordinate
from raydamp.spectral import build_tables


@pytest.fixture(scope="session")
def poiseuille():
    return build_profile("poiseuille")


@pytest.fixture(scope="session")
def coord(poiseuille):
    return sqrt_coordinate(poiseuille)


@pytest.fixture(scope="session")
def quartic():
    # u = y^2 + 0.25 y^4: class S with nonconstant curvature
    return build_profile({"name": "quartic", "type": "poly_even",
                          "coeffs": [0.0, 1.0, 0.25]})


@pytest.fixture(scope="session")
def quartic_coord(quartic):
    return sqrt_coordinate(quartic)


class TableCache:
    """Session-wide cache of spectral tables keyed by (alpha, n_c, n_y)."""

    def __init__(self, profile, coord):
        self.profile = profile
        self.coord = coord
        self._cache = {}

    def get(self, alpha, n_c=256, n_y=513, keep_solutions=True):
        key = (float(alpha), int(n_c), int(n_y), bool(keep_solutions))
        if key not in self._cache:
            self._cache[key] = build_tables(
                self.profile, self.coord, alpha, n_c=n_c, n_y=n_y,
                keep_solutions=keep_solutions,
            )
        return self._cache[key]


@pytest.fixture(scope="session")
def tables_cache(poiseuille, coord):
    return TableCache(poiseuille, coord)


def mixed_center(y):
    y = np.asarray(y, dtype=float)
    return np.sin(np.pi * y) * (1.0 - y**2) + np.cos(0.5 * np.pi * y) ** 2


@pytest.fixture(scope="session")
def omega0_mixed():
    return mixed_center
