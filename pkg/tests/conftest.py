import numpy as np
import pytest

from caplab import make_channel, qmath


def random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random density matrix from a Ginibre factor."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    return rho / rho.trace().real


def random_pure(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return psi / np.linalg.norm(psi)


def random_channel(in_dim: int, out_dim: int, k: int, rng: np.random.Generator):
    """Random channel with k Kraus operators, cut from a Haar isometry."""
    big = qmath.haar_unitary(out_dim * k, rng)
    iso = big[:, :in_dim]  # columns orthonormal: V†V = I on the input
    kraus = [iso[i * out_dim : (i + 1) * out_dim, :] for i in range(k)]
    return make_channel(kraus)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
