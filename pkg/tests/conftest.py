import time

import numpy as np
import pytest

from zoomrbf.experiment import oneshot_report, run_table1, run_table2


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


# The experiment runs take seconds each; share them across modules.
@pytest.fixture(scope="session")
def table1_timed():
    t0 = time.perf_counter()
    report = run_table1()
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table1(table1_timed):
    return table1_timed[0]


@pytest.fixture(scope="session")
def table2():
    return run_table2()


@pytest.fixture(scope="session")
def oneshot():
    return oneshot_report()


@pytest.fixture(scope="session")
def oneshot_error(oneshot):
    return oneshot.final_error
