"""
Shared fixtures: settings, seeded random generators and the surface suite.
"""

import json

import numpy as np
import pytest

from config.settings import DATA_DIR, get_settings
from hyperbolic_markings.pants_builder import (
    four_cusp_sphere,
    genus_two,
    punctured_torus,
    thrice_punctured_sphere,
)

SEED = 20240601


@pytest.fixture(scope="session")
def settings():
    return get_settings("default")


@pytest.fixture
def rng():
    """Fresh generator per test so results do not depend on test order"""
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def test_data(data_dir):
    """Loader for JSON fixtures below data/"""

    def load(relative):
        with open(data_dir / relative, "r", encoding="utf-8") as handle:
            return json.load(handle)

    return load


# Surface suite
@pytest.fixture(scope="session")
def sphere_rep():
    return thrice_punctured_sphere()


@pytest.fixture(scope="session")
def torus_rep():
    return punctured_torus(1.0, 0.0)


@pytest.fixture(scope="session")
def twisted_torus_rep():
    return punctured_torus(1.0, 0.5)


@pytest.fixture(scope="session")
def four_cusp_rep():
    return four_cusp_sphere(1.0, 0.0)


@pytest.fixture(scope="session")
def genus_two_rep():
    return genus_two()


@pytest.fixture(scope="session")
def suite(sphere_rep, torus_rep, four_cusp_rep, genus_two_rep):
    return {
        "three_cusp_sphere": sphere_rep,
        "punctured_torus": torus_rep,
        "punctured_torus_short": punctured_torus(0.5, 0.3),
        "punctured_torus_long": punctured_torus(2.0, 0.7),
        "four_cusp_sphere": four_cusp_rep,
        "genus_two": genus_two_rep,
    }
