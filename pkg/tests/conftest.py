import warnings

import numpy as np
import pytest

import pac_topopt as pt


@pytest.fixture(autouse=True)
def _quiet_mesh_warnings():
    # acceptance-scale meshes deliberately violate the h <= eps guideline
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="mesh size h", category=RuntimeWarning)
        yield


@pytest.fixture
def strip_mesh():
    return pt.build_box_mesh(((0.0, 6.0), (-0.5, 0.5)), (48, 8))


@pytest.fixture
def unit_square():
    return pt.build_box_mesh(((0.0, 1.0), (0.0, 1.0)), (1, 1))


@pytest.fixture
def coarse_t1r1():
    return pt.with_overrides(pt.preset("T1R1"), resolution=(8, 2),
                             cg_tol=1e-12, cg_max_iter=100000)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
