import math

import numpy as np
import pytest

from telecode.lattice import build_planar_code
from telecode.oracle import enumerate_outcomes, prepare_logical_bell

# keep worker BLAS single-threaded; small matrices thrash otherwise
try:
    from threadpoolctl import threadpool_limits

    threadpool_limits(1)
except Exception:
    pass


@pytest.fixture(scope="session")
def lat2():
    return build_planar_code(2)


@pytest.fixture(scope="session")
def lat3():
    return build_planar_code(3)


@pytest.fixture(scope="session")
def bell2():
    return prepare_logical_bell(2)


@pytest.fixture(scope="session")
def bell3():
    return prepare_logical_bell(3)


_ENUM_CACHE = {}


@pytest.fixture(scope="session")
def oracle_enum(bell2, bell3):
    """Cached oracle enumerations keyed by (d, t_over_pi, theta_over_pi)."""

    def get(d, t_over_pi, theta_over_pi, phi_over_pi=0.0):
        key = (d, t_over_pi, theta_over_pi, phi_over_pi)
        if key not in _ENUM_CACHE:
            state = bell2 if d == 2 else bell3
            _ENUM_CACHE[key] = enumerate_outcomes(
                state, t_over_pi * math.pi, theta_over_pi * math.pi,
                phi_over_pi * math.pi)
        return _ENUM_CACHE[key]

    return get


def random_param_points(n, seed, t_lo=0.02, t_hi=0.23, th_lo=0.02, th_hi=0.48):
    rng = np.random.default_rng(seed)
    return [
        (float(t), float(th))
        for t, th in zip(rng.uniform(t_lo, t_hi, n), rng.uniform(th_lo, th_hi, n))
    ]
