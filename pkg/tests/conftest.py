import numpy as np
import pytest

import torsionlab as tl


@pytest.fixture(scope="session")
def disk40():
    return tl.build_disk_mesh(1.0, 40)


@pytest.fixture(scope="session")
def disk40_g0(disk40):
    return tl.solve_torsion(disk40, 0.0)


@pytest.fixture(scope="session")
def disk40_g03(disk40):
    return tl.solve_torsion(disk40, 0.3)


@pytest.fixture(scope="session")
def disk40_eigen(disk40):
    return tl.solve_eigen(disk40)


@pytest.fixture(scope="session")
def flat():
    return tl.flat_metric()


@pytest.fixture(scope="session")
def oracle_flat_g0(flat):
    return tl.shoot_torsion(flat, 0.0, 1.0)


@pytest.fixture(scope="session")
def oracle_flat_g03(flat):
    return tl.shoot_torsion(flat, 0.3, 1.0)
