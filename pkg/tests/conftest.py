import numpy as np
import pytest

from phcenter.lti_core import SystemModel
from phcenter.ph_form import generate_random_ph

SEEDS = list(range(10))


@pytest.fixture
def scalar_model():
    return SystemModel.scalar(-1.0, 1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def random_models():
    return [generate_random_ph(6, 3, seed=s) for s in SEEDS]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n, scale=1.0):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (Z + Z.conj().T) / 2


def interior_point(model, rng, spread=0.3):
    """A strictly feasible X near the identity (feasible for generated pH models)."""
    from phcenter.kyp import assemble_W

    n = model.n
    for _ in range(100):
        X = np.eye(n) + random_hermitian(rng, n, spread / np.sqrt(n))
        if np.linalg.eigvalsh(X)[0] > 0 and np.linalg.eigvalsh(assemble_W(model, X))[0] > 0:
            return X
        spread /= 2
    return np.eye(n, dtype=complex)
