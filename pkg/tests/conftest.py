import numpy as np
import pytest

from hnwalk.fock import LatticeParams, build_basis
from hnwalk.hamiltonian import build_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def make_system(L, delta=0.0, U=0.0, F=0.0, N=2):
    params = LatticeParams(L=L, delta=delta, U=U, F=F, N=N)
    basis = build_basis(params)
    return params, basis, build_hamiltonian(basis, params)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
