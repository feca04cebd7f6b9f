import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnwalk.errors import ContractError, ParameterError
from hnwalk.fock import LatticeParams, build_basis
from hnwalk.observables import (
    asymmetry,
    correlator,
    density,
    doublon_density,
    frame,
    frame_violations,
    oscillation_period,
    position_mean,
    position_spread,
    write_correlator_table,
    write_density_table,
)
from hnwalk.oracle import bessel_density, bessel_window_ok
from hnwalk.propagator import EvolutionSchedule, StateVector, evolve, initial_state, normalized

from .conftest import make_system, random_state
from .test_hamiltonian import first_quantized

B70 = build_basis(LatticeParams(L=70, N=2))


def test_initial_densities():
    n1 = density(initial_state(B70, "neighboring"), B70)
    n2 = density(initial_state(B70, "same-site"), B70)
    assert n1[34] == n1[35] == 1 and n1.sum() == 2
    assert n2[34] == 2 and n2.sum() == 2


def test_doublon_examples():
    assert doublon_density(initial_state(B70, "same-site"), B70)[34] == 2
    assert not doublon_density(initial_state(B70, "neighboring"), B70).any()
    basis = build_basis(LatticeParams(L=3, N=2))
    amps = np.zeros(basis.dimension, complex)
    amps[basis.index_of[(1, 1)]] = amps[basis.index_of[(1, 2)]] = 1 / math.sqrt(2)
    n2 = doublon_density(StateVector(amps), basis)
    assert n2[0] == pytest.approx(1.0) and n2[1:].sum() == 0


def test_correlator_examples():
    G = correlator(initial_state(B70, "same-site"), B70)
    assert G[34, 34] == 2 and G.sum() == 2
    G = correlator(initial_state(B70, "neighboring"), B70)
    assert G[34, 35] == G[35, 34] == 1 and G.sum() == 2


def test_n1_only_observables_rejected():
    b1 = build_basis(LatticeParams(L=5, N=1))
    psi = initial_state(b1, "single-center")
    with pytest.raises(ParameterError):
        doublon_density(psi, b1)
    with pytest.raises(ParameterError):
        correlator(psi, b1)


def test_unnormalized_rejected():
    psi = StateVector(2 * initial_state(B70, "neighboring").amplitudes)
    with pytest.raises(ContractError):
        density(psi, B70)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_sum_rules_on_random_states(L, seed):
    basis = build_basis(LatticeParams(L=L, N=2))
    psi = StateVector(random_state(np.random.default_rng(seed), basis.dimension))
    fr = frame(psi, basis, center=L / 2)
    assert frame_violations(fr, 2) == []
    assert np.array_equal(fr.single_density, fr.density - fr.doublon_density)
    G = fr.correlator
    assert np.allclose(np.diag(G), fr.doublon_density)
    # Off-diagonal <n_i n_j> sums over j to (N - 1) n_i minus the on-site pair term.
    assert np.allclose(G.sum(axis=1), fr.density)


def test_correlator_against_first_quantized(rng):
    # Gamma_ij = <a+_i a+_j a_i a_j> from a product-space wavefunction psi(x1, x2).
    L = 5
    params, basis, _ = make_system(L)
    psi = random_state(rng, basis.dimension)
    P = np.zeros((L * L, basis.dimension))
    for k, (i, j) in enumerate(basis.states):
        i, j = i - 1, j - 1
        if i == j:
            P[i * L + i, k] = 1
        else:
            P[i * L + j, k] = P[j * L + i, k] = 1 / math.sqrt(2)
    prob = np.abs((P @ psi).reshape(L, L)) ** 2
    assert np.allclose(correlator(StateVector(psi), basis), 2 * prob, atol=1e-14)


def test_single_particle_bessel_profile():
    params, basis, H = make_system(70, N=1)
    i0, t = 35, 3.0
    assert bessel_window_ok(70, i0, t)
    snap = evolve(H, initial_state(basis, "single-center"), EvolutionSchedule(t_max=t, n_snapshots=2))[-1]
    n = density(normalized(snap), basis)
    ref = np.array([bessel_density(i, i0, t) if abs(i - i0) <= 60 else 0.0 for i in range(1, 71)])
    assert np.max(np.abs(n - ref)) < 1e-6


def test_sigma_gamma_ii_cross_checked():
    # Frozen from an independent first-quantized dense-expm run (L=12, delta=0.04, t=2).
    import scipy.linalg

    L, d, t = 12, 0.04, 2.0
    for U in (0.0, 2.0, 10.0):
        params, basis, H = make_system(L, delta=d, U=U)
        psi0 = initial_state(basis, "neighboring")
        snap = evolve(H, psi0, EvolutionSchedule(t_max=t, n_snapshots=2))[-1]
        ours = np.trace(correlator(normalized(snap), basis))
        ref_state = scipy.linalg.expm(-1j * t * first_quantized(L, d, U, 0.0)) @ psi0.amplitudes
        ref_state /= np.linalg.norm(ref_state)
        ref = 2 * np.sum(np.abs(ref_state[basis.doublon_indices]) ** 2)
        assert ours == pytest.approx(ref, abs=1e-9)


def test_asymmetry_examples():
    assert asymmetry(np.array([0, 1, 2, 1, 0.0]), 3) == 0
    assert asymmetry(np.array([0, 0, 0, 1, 1.0]), 3) == 1
    assert asymmetry(np.array([1, 1, 0, 0, 0.0]), 3) == -1
    assert asymmetry(np.array([0, 1, 1, 0.0]), 2.5) == 0


def test_asymmetry_follows_delta_sign():
    values = {}
    for d in (-0.08, 0.04, 0.08):
        _, basis, H = make_system(30, delta=d, U=2.0)
        snap = evolve(H, initial_state(basis, "neighboring"), EvolutionSchedule(t_max=5.0, n_snapshots=2))[-1]
        values[d] = asymmetry(density(normalized(snap), basis), 15.5)
    assert values[0.04] < 0 and values[0.08] < values[0.04]
    assert values[-0.08] == pytest.approx(-values[0.08], abs=1e-8)


def test_hermitian_mirror_symmetry():
    for kind, mirror in (("same-site", lambda n: n[:69][::-1]), ("neighboring", lambda n: n[::-1])):
        _, basis, H = make_system(70, delta=0.0, U=2.0)
        snap = evolve(H, initial_state(basis, kind), EvolutionSchedule(t_max=4.0, n_snapshots=2))[-1]
        n = density(normalized(snap), basis)
        if kind == "same-site":
            # Mirror about site 35: site 35+k <-> 35-k over sites 1..69.
            assert np.max(np.abs(n[:69] - mirror(n))) < 1e-8
        else:
            assert np.max(np.abs(n - mirror(n))) < 1e-8


def test_position_moments():
    n = np.array([0, 1, 0, 1, 0.0])
    assert position_mean(n) == 3
    assert position_spread(n) == 1


def test_period_of_cosine():
    dt = 0.05
    t = np.arange(0, 20 + dt / 2, dt)
    est = oscillation_period(np.cos(2 * np.pi * t / 5), dt)
    assert est.period == pytest.approx(5, rel=0.02)
    assert est.sharpness > 100


@pytest.mark.parametrize("period", [3.0, 7.3, 12.08])
def test_period_with_offset_and_harmonic(period):
    dt = 0.1
    t = np.arange(0, 4 * period, dt)
    x = 4 + np.sin(2 * np.pi * t / period) ** 2 + 0.1 * np.cos(4 * np.pi * t / period)
    # sin^2 oscillates at half the period of sin.
    assert oscillation_period(x, dt).period == pytest.approx(period / 2, rel=0.02)


def test_no_oscillation():
    assert oscillation_period(np.ones(200), 0.1) is None


def test_tables(tmp_path):
    _, basis, H = make_system(6, delta=0.1, U=2.0)
    snaps = evolve(H, initial_state(basis, "neighboring"), EvolutionSchedule(t_max=1.0, n_snapshots=3))
    frames = [frame(s, basis, 3.5) for s in snaps]
    header = {"L": 6, "delta": 0.1}
    p = write_density_table(tmp_path / "d.tsv", frames, header)
    lines = p.read_text().splitlines()
    assert json.loads(lines[0].removeprefix("# params: ")) == header
    assert lines[1] == "# columns: t site n n1 n2"
    data = np.loadtxt(p, comments="#")
    assert data.shape == (3 * 6, 5)
    assert np.allclose(data[:, 2], data[:, 3] + data[:, 4])
    q = write_correlator_table(tmp_path / "g.tsv", frames[-1], header)
    g = np.loadtxt(q, comments="#")
    assert g.shape == (36, 4) and g[:, 3].sum() == pytest.approx(2)
