import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rand_unit(rng, d):
    u = rng.normal(size=d)
    return u / np.linalg.norm(u)


def rand_tangent(rng, u):
    a = rng.normal(size=u.size)
    return a - (a @ u) * u


def rand_rotation(rng, d):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def foot_oracle(p, q):
    """Foot of the perpendicular from the origin to the line pq, by least squares."""
    d = (q - p)[:, None]
    t, *_ = np.linalg.lstsq(d, -p, rcond=None)
    return p + t[0] * (q - p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
