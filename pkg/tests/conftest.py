import numpy as np
import pytest

from mwgfem.mesh import Mesh, build_initial, refine_uniform

REF_TRIANGLE = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]


@pytest.fixture
def ref_mesh():
    return Mesh(REF_TRIANGLE, [(0, 1, 2)])


@pytest.fixture
def square():
    return build_initial("unit_square")


@pytest.fixture
def square3():
    return refine_uniform(build_initial("unit_square"), 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


def random_triangle(rng):
    while True:
        xy = rng.uniform(-2, 2, size=(3, 2))
        d1, d2 = xy[1] - xy[0], xy[2] - xy[0]
        area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if area < 0:
            xy = xy[[0, 2, 1]]
            area = -area
        diam = max(np.linalg.norm(xy[i] - xy[j]) for i in range(3) for j in range(i))
        if area > 0.05 * diam**2:
            return xy
