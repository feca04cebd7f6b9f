import math

import numpy as np
import pytest
import scipy.special

from hnwalk.errors import DomainError, OracleScaleError
from hnwalk.oracle import (
    DenseOracle,
    bessel_density,
    bessel_j,
    bessel_window_ok,
    bloch_qfi_single,
    dense_qfi_exact,
    expm_apply,
)
from hnwalk.propagator import StateVector, initial_state

from .conftest import make_system, random_state


def test_identity_at_t0(rng):
    _, basis, H = make_system(6, delta=0.1, U=2.0, F=0.3)
    psi = StateVector(random_state(rng, basis.dimension))
    oracle = DenseOracle.from_hamiltonian(H)
    assert np.max(np.abs(expm_apply(oracle, psi, 0.0).amplitudes - psi.amplitudes)) < 1e-12
    eye = oracle.right @ oracle.right_inv
    assert np.allclose(eye, np.eye(basis.dimension), atol=1e-10)


def test_unitary_when_hermitian(rng):
    _, basis, H = make_system(6, delta=0.0, U=2.0, F=0.3)
    psi = StateVector(random_state(rng, basis.dimension))
    out = expm_apply(DenseOracle.from_hamiltonian(H), psi, 7.3)
    assert abs(out.norm_sq - psi.norm_sq) < 1e-10


def test_semigroup(rng):
    _, basis, H = make_system(6, delta=0.15, U=3.0, F=0.2)
    oracle = DenseOracle.from_hamiltonian(H)
    psi = StateVector(random_state(rng, basis.dimension))
    two_step = expm_apply(oracle, expm_apply(oracle, psi, 1.3), 2.1)
    one_step = expm_apply(oracle, psi, 3.4)
    assert np.max(np.abs(two_step.amplitudes - one_step.amplitudes)) < 1e-8


def test_fallback_on_defective_matrix():
    jordan = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    oracle = DenseOracle.from_hamiltonian(jordan)
    assert oracle.use_expm
    t = 0.7
    out = expm_apply(oracle, StateVector([0, 1]), t).amplitudes
    expected = np.exp(-1j * t) * np.array([-1j * t, 1.0])
    assert np.allclose(out, expected, atol=1e-12)


def test_scale_guard():
    with pytest.raises(OracleScaleError):
        DenseOracle.from_hamiltonian(np.zeros((2501, 2501)))


@pytest.mark.parametrize("n,x", [(0, 0.0), (1, 0.0), (0, 2.0), (3, 6.0), (-5, 6.0), (17, 20.0), (40, 20.0), (-60, 14.0)])
def test_bessel_series_against_scipy(n, x):
    assert bessel_j(n, x) == pytest.approx(scipy.special.jv(n, x), rel=1e-12, abs=1e-15)


def test_bessel_density_examples():
    assert bessel_density(35, 35, 0.0) == 1.0
    assert bessel_density(36, 35, 0.0) == 0.0
    total = sum(bessel_density(i, 0, 3.0) for i in range(-40, 41))
    assert abs(total - 1) < 1e-9


def test_bessel_order_guard():
    with pytest.raises(DomainError):
        bessel_j(61, 1.0)


def test_bessel_window():
    assert bessel_window_ok(121, 60, 3.0)
    assert not bessel_window_ok(121, 60, 25.0)


def test_exact_qfi_matches_bloch_closed_form():
    # Deep chain, short time: the edges are irrelevant.
    L, F = 61, 0.26
    params, basis, H = make_system(L, F=F, N=1)
    dH = np.diag(np.arange(1, L + 1)).astype(complex)
    psi0 = initial_state(basis, "single-center").amplitudes
    for t in (0.5, 2.0, 6.0):
        assert dense_qfi_exact(H.toarray(), dH, psi0, t) == pytest.approx(bloch_qfi_single(t, F), rel=1e-8)


def test_bloch_closed_form_short_time():
    # F_Q -> 2 t^4 for t << 1/F.
    assert bloch_qfi_single(1e-2, 0.26) == pytest.approx(2e-8, rel=1e-4)
    assert math.isclose(bloch_qfi_single(0.0, 0.3), 0.0)
