import numpy as np
import pytest

from fraclab.gridfn import CutoffSpec, GridFunction, build_cutoff, build_grid
from fraclab.operator import FractionalParams
from fraclab.regions import Ball


@pytest.fixture
def grid65():
    return build_grid(1, ((-2.0, 2.0),), 65, Ball((0.0,), 1.0))


@pytest.fixture
def grid129():
    return build_grid(1, ((-2.0, 2.0),), 129, Ball((0.0,), 1.0))


@pytest.fixture
def params_half():
    return FractionalParams(1, 0.5)


@pytest.fixture
def bump65(grid65):
    return build_cutoff(grid65, CutoffSpec(Ball((0.0,), 0.3), Ball((0.0,), 0.8), order=4))


def random_dirichlet(grid, rng):
    vals = np.zeros(grid.shape)
    vals[grid.mask] = rng.standard_normal(grid.n_omega)
    return GridFunction(grid, vals, dirichlet=True)
