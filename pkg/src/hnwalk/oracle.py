"""Slow reference computations for tests: dense exponentials and Bessel series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from .errors import DomainError, OracleScaleError, ShapeError
from .hamiltonian import SparseHamiltonian
from .propagator import StateVector

MAX_ORACLE_DIM = 2500
COND_LIMIT = 1e12
BESSEL_MAX_ORDER = 60


@dataclass(frozen=True, eq=False)
class DenseOracle:
    """Dense copy of H with its eigendecomposition ``H = V diag(lam) V^-1``.

    When ``V`` is too ill-conditioned (near-defective H), ``use_expm`` is set
    and :func:`expm_apply` falls back to scaling-and-squaring.
    """

    matrix: np.ndarray
    eigvals: np.ndarray | None
    right: np.ndarray | None
    right_inv: np.ndarray | None
    cond: float
    use_expm: bool

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_hamiltonian(cls, H: SparseHamiltonian | np.ndarray) -> DenseOracle:
        M = H.toarray() if isinstance(H, SparseHamiltonian) else np.asarray(H, dtype=complex)
        if M.shape[0] > MAX_ORACLE_DIM:
            raise OracleScaleError(
                f"dense oracle limited to dimension {MAX_ORACLE_DIM}, got {M.shape[0]}"
            )
        M = np.array(M, dtype=complex)
        lam, V = np.linalg.eig(M)
        cond = float(np.linalg.cond(V))
        if not (cond < COND_LIMIT):
            return cls(M, None, None, None, cond, True)
        return cls(M, lam, V, np.linalg.inv(V), cond, False)


def expm_apply(oracle: DenseOracle, psi0: StateVector, t: float) -> StateVector:
    if psi0.dimension != oracle.dimension:
        raise ShapeError(f"state dimension {psi0.dimension} != oracle dimension {oracle.dimension}")
    if t == 0:
        return StateVector(psi0.amplitudes, t=0.0)
    if oracle.use_expm:
        out = scipy.linalg.expm(-1j * t * oracle.matrix) @ psi0.amplitudes
    else:
        coeffs = oracle.right_inv @ psi0.amplitudes
        out = oracle.right @ (np.exp(-1j * oracle.eigvals * t) * coeffs)
    return StateVector(out, t=float(psi0.t + t))


def bessel_j(n: int, x: float, dps: int = 40) -> float:
    """J_n(x) from its power series, summed in extended precision."""
    if abs(n) > BESSEL_MAX_ORDER:
        raise DomainError(f"|order| must be <= {BESSEL_MAX_ORDER}, got {n}")
    sign = -1 if (n < 0 and n % 2) else 1
    n = abs(n)
    with mpmath.workdps(dps):
        half = mpmath.mpf(x) / 2
        term = half**n / mpmath.factorial(n)
        total = term
        q = -(half * half)
        tiny = mpmath.mpf(10) ** (5 - dps)
        k = 0
        # Terms grow until k ~ x/2; |J| <= 1 so an absolute cutoff suffices.
        while k <= half or abs(term) > tiny:
            k += 1
            term = term * q / (k * (k + n))
            total += term
        return sign * float(total)


def bessel_density(i: int, i0: int, t: float) -> float:
    """Single-particle density |J_{i-i0}(2t)|^2 on the infinite untilted chain."""
    return bessel_j(i - i0, 2.0 * t) ** 2


def bessel_window_ok(L: int, i0: int, t: float) -> bool:
    """True when the light cone (speed 2) stays 10 sites clear of both edges."""
    return 2.0 * t + 10.0 < min(i0 - 1, L - i0)


def dense_qfi_exact(H0: np.ndarray, dH: np.ndarray, psi0: np.ndarray, t: float) -> float:
    """QFI for a Hermitian family H0 + F dH at one time, from exact derivatives.

    d/dF exp(-iHt) is built from the eigendecomposition (divided differences
    of exp(-i lam t)), then plugged into 4(<d psi|d psi> - |<psi|d psi>|^2).
    """
    lam, V = np.linalg.eigh(H0)
    phase = np.exp(-1j * lam * t)
    diff = lam[:, None] - lam[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (phase[:, None] - phase[None, :]) / diff
    near = np.abs(diff) < 1e-12
    G[near] = (-1j * t * np.broadcast_to(phase[:, None], G.shape))[near]
    dU = V @ (G * (V.conj().T @ dH @ V)) @ V.conj().T
    psi = V @ (phase * (V.conj().T @ psi0))
    dpsi = dU @ psi0
    return float(4 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2))


def bloch_qfi_single(t: float, F: float, J: float = 1.0) -> float:
    """QFI of a site-localized particle in an infinite tilted chain (closed form).

    Exact for H = -J sum (a+_{i+1} a_i + h.c.) + F sum i n_i with the
    initial state on one site.
    """
    a = (1 - math.cos(F * t)) / F
    b = t - math.sin(F * t) / F
    return 8 * J**2 / F**2 * (a * a + b * b)
