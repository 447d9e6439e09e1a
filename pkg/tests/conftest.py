import numpy as np
import pytest

from qmimo import ChannelParams, DensityMatrix


def random_density(gen: np.random.Generator, dim: int) -> DensityMatrix:
    """Ginibre-induced random mixed state: G G^dagger normalized."""
    g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    mat = g @ g.conj().T
    return DensityMatrix(mat / np.trace(mat).real)


def random_params(gen: np.random.Generator) -> ChannelParams:
    eta, eps, lam = gen.random(3)
    return ChannelParams(eta=float(eta), eps=float(eps), lam=float(lam))


@pytest.fixture
def gen() -> np.random.Generator:
    return np.random.default_rng(1234)
