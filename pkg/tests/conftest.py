import numpy as np
import pytest

import bergmanflow as bf


@pytest.fixture(scope="session")
def unit_disc():
    return bf.make_disc(1.0)


@pytest.fixture(scope="session")
def disc_grid(unit_disc):
    return bf.build_radial_grid(unit_disc)


@pytest.fixture(scope="session")
def annulus():
    return bf.make_annulus(0.5, 1.0)


@pytest.fixture(scope="session")
def annulus_grid(annulus):
    return bf.build_radial_grid(annulus)
