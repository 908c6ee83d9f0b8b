import numpy as np
import pytest


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def random_hermitian(rng, dim, scale=1.0):
    a = random_complex(rng, (dim, dim), scale)
    return 0.5 * (a + a.conj().T)


def random_density(rng, dim):
    a = random_complex(rng, (dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_model(rng, dim, n_jumps, scale=1.0):
    from lindstep.lindblad import build_model

    h = random_hermitian(rng, dim, scale)
    jumps = [random_complex(rng, (dim, dim), scale) for _ in range(n_jumps)]
    return build_model(h, jumps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
