import time

import numpy as np
import pytest

import statembed as se

SPHERE_PATCH = ((np.pi / 4, 3 * np.pi / 4), (0.0, np.pi / 2))

_SESSION_T0 = time.perf_counter()


def session_elapsed() -> float:
    return time.perf_counter() - _SESSION_T0


@pytest.fixture(scope="session")
def sphere65():
    return se.fixture("sphere2", shape=65)


@pytest.fixture(scope="session")
def sphere_patch65():
    return se.fixture("sphere2", shape=65, ranges=SPHERE_PATCH)


@pytest.fixture(scope="session")
def sphere_patch33():
    return se.fixture("sphere2", shape=33, ranges=SPHERE_PATCH)


@pytest.fixture(scope="session")
def exp33():
    return se.fixture("exp_potential", shape=33)


@pytest.fixture(scope="session")
def gaussian65():
    return se.fixture("gaussian1d", shape=65)


@pytest.fixture(scope="session")
def bonnet_sphere65(sphere_patch65):
    return se.bonnet_embed(sphere_patch65.structure, sphere_patch65.extrinsic)


@pytest.fixture(scope="session")
def bonnet_sphere33(sphere_patch33):
    return se.bonnet_embed(sphere_patch33.structure, sphere_patch33.extrinsic)


@pytest.fixture(scope="session")
def sphere_ambient65(sphere_patch65, bonnet_sphere65):
    psi0, closed = se.pullback_potential(bonnet_sphere65.pair)
    amb = se.extend_potential(bonnet_sphere65.pair, psi0, epsilon=0.1)
    return psi0, closed, amb
