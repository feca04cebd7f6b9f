"""Time evolution |psi(t)> = exp(-iHt)|psi(0)> under a non-Hermitian H.

Amplitudes are kept raw (unnormalized) so norm growth or decay stays
visible; observables normalize at evaluation time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateStateError, EvolutionError, ParameterError, ShapeError
from .fock import FockBasis
from .hamiltonian import SparseHamiltonian

log = logging.getLogger(__name__)

INITIAL_KINDS = ("neighboring", "same-site", "single-center")

_METHOD_ALIASES = {
    "stepped": "stepped",
    "stepped-integrator": "stepped",
    "rk4": "stepped",
    "dense": "dense",
    "dense-exponential": "dense",
}

# Dense matvec beats CSR below this dimension.
_DENSE_MATVEC_MAX_DIM = 400
_NORM_RANGE = (1e-280, 1e280)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes at time ``t`` together with their squared norm."""

    amplitudes: np.ndarray
    t: float = 0.0
    norm_sq: float = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ShapeError(f"amplitudes must be 1-D, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "norm_sq", float(np.vdot(amps, amps).real))

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def __len__(self) -> int:
        return self.dimension


@dataclass(frozen=True)
class EvolutionSchedule:
    """Uniform snapshot grid ``linspace(0, t_max, n_snapshots)``.

    ``dt`` is the largest integrator step; each snapshot interval is split
    into an integer number of equal steps no longer than ``dt``. With
    ``self_check`` the stepped run is repeated at ``dt/2`` and the two must
    agree to ``check_tol`` (relative to ``max(1, |psi|)``).
    """

    t_max: float
    n_snapshots: int = 101
    dt: float = 1e-3
    method: str = "stepped"
    self_check: bool = True
    check_tol: float = 1e-8

    def __post_init__(self):
        if self.method not in _METHOD_ALIASES:
            raise ParameterError(
                f"unknown method {self.method!r}; expected one of {sorted(_METHOD_ALIASES)}"
            )
        object.__setattr__(self, "method", _METHOD_ALIASES[self.method])
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if int(self.n_snapshots) != self.n_snapshots or self.n_snapshots < 2:
            raise ParameterError(f"n_snapshots must be an integer >= 2, got {self.n_snapshots}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ParameterError(f"t_max must be > 0, got {self.t_max}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, int(self.n_snapshots))

    @property
    def spacing(self) -> float:
        return self.t_max / (self.n_snapshots - 1)

    def as_dict(self) -> dict:
        return {"t_max": float(self.t_max), "n_snapshots": int(self.n_snapshots),
                "dt": float(self.dt), "method": self.method,
                "self_check": bool(self.self_check), "check_tol": float(self.check_tol)}


def initial_state(basis: FockBasis, kind: str) -> StateVector:
    """Localized start at the chain center ``c = (L + 1) // 2``.

    ``neighboring`` puts one boson on ``c`` and one on ``c+1``, ``same-site``
    both on ``c``, ``single-center`` the only boson on ``c``.
    """
    c = (basis.L + 1) // 2
    if kind == "single-center":
        if basis.N != 1:
            raise ParameterError("single-center start needs an N=1 basis")
        occ = (c,)
    elif kind in ("neighboring", "same-site"):
        if basis.N != 2:
            raise ParameterError(f"{kind} start needs an N=2 basis")
        occ = (c, c + 1) if kind == "neighboring" else (c, c)
    else:
        raise ParameterError(f"unknown initial state {kind!r}; expected one of {INITIAL_KINDS}")
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index_of[occ]] = 1.0
    return StateVector(amps)


def initial_center(basis: FockBasis, kind: str) -> float:
    """Mirror point of the initial density: a site, or a bond midpoint."""
    c = (basis.L + 1) // 2
    return c + 0.5 if kind == "neighboring" else float(c)


def normalized(psi: StateVector) -> StateVector:
    nsq = psi.norm_sq
    if not (nsq > 0 and math.isfinite(nsq)):
        raise DegenerateStateError(f"cannot normalize state with norm_sq={nsq}")
    return StateVector(psi.amplitudes / math.sqrt(nsq), t=psi.t)


def evolve(
    H: SparseHamiltonian, psi0: StateVector, schedule: EvolutionSchedule
) -> list[StateVector]:
    """Snapshots of ``exp(-iHt) psi0`` on ``schedule.times`` (raw amplitudes)."""
    if psi0.dimension != H.dimension:
        raise ShapeError(f"state dimension {psi0.dimension} != H dimension {H.dimension}")
    times = schedule.times
    if schedule.method == "dense":
        from .oracle import DenseOracle, expm_apply

        oracle = DenseOracle.from_hamiltonian(H)
        snaps = [psi0] + [expm_apply(oracle, psi0, t) for t in times[1:]]
        for s in snaps:
            _check_norm(s.amplitudes, s.t)
        return snaps

    amps = _stepped(H, psi0.amplitudes, times, schedule.dt)
    if schedule.self_check:
        fine = _stepped(H, psi0.amplitudes, times, schedule.dt / 2)
        scale = np.maximum(1.0, np.linalg.norm(fine, axis=1))
        change = float(np.max(np.abs(fine - amps).max(axis=1) / scale))
        log.debug("step-halving change %.3e (dt=%g)", change, schedule.dt)
        if not change < schedule.check_tol:
            raise EvolutionError(
                f"integrator not converged: halving dt={schedule.dt:g} changed the "
                f"snapshots by {change:.2e} (tolerance {schedule.check_tol:.0e}); "
                "reduce dt",
                t=float(times[-1]),
            )
        amps = fine
    snaps = [StateVector(a, t=float(t)) for a, t in zip(amps, times)]
    # t = 0 is returned untouched.
    snaps[0] = StateVector(psi0.amplitudes, t=0.0)
    return snaps


def _check_norm(amps: np.ndarray, t: float) -> None:
    nsq = float(np.vdot(amps, amps).real)
    if not (math.isfinite(nsq) and _NORM_RANGE[0] < nsq < _NORM_RANGE[1]):
        raise EvolutionError(f"norm left the representable range (norm_sq={nsq:g}) at t={t:g}", t=t)


def _stepped(H: SparseHamiltonian, psi0: np.ndarray, times: np.ndarray, dt: float) -> np.ndarray:
    """Fixed-step classical RK4 on dpsi/dt = -i H psi.

    For a constant linear generator one RK4 step is exactly the degree-4
    Taylor polynomial of exp(-iH h), evaluated here in Horner form. The
    generator is shifted by the initial-state energy and the resulting
    global phase is restored exactly at each snapshot.
    """
    y = np.array(psi0, dtype=complex)
    nsq0 = float(np.vdot(y, y).real)
    shift = float((np.vdot(y, H.matrix @ y) / nsq0).real) if nsq0 > 0 else 0.0

    interval = float(times[1] - times[0])
    n_steps = max(1, math.ceil(interval / dt - 1e-9))
    h = interval / n_steps

    K = H.matrix - shift * sp.identity(H.dimension, dtype=complex, format="csr")
    A = (-1j * h) * K
    if H.dimension <= _DENSE_MATVEC_MAX_DIM:
        A = A.toarray()
    else:
        A = A.tocsr()

    out = np.empty((len(times), y.shape[0]), dtype=complex)
    out[0] = y
    for k in range(1, len(times)):
        for _ in range(n_steps):
            w = y + 0.25 * (A @ y)
            w = y + (A @ w) / 3.0
            w = y + 0.5 * (A @ w)
            y = y + A @ w
        _check_norm(y, float(times[k]))
        out[k] = y * np.exp(-1j * shift * times[k])
    return out


def write_snapshots(path: str | Path, snapshots: list[StateVector], basis: FockBasis | None = None) -> Path:
    """Dump snapshots as text.

    Header lines start with ``#``. Each following line is one snapshot:
    ``t norm_sq re_0 im_0 re_1 im_1 ...`` in basis order.
    """
    path = Path(path)
    dim = snapshots[0].dimension
    with path.open("w") as fh:
        fh.write("# hnwalk-snapshots v1\n")
        fh.write(f"# dimension {dim}\n")
        if basis is not None:
            fh.write("# basis " + " ".join(",".join(map(str, s)) for s in basis.states) + "\n")
        fh.write("# columns: t norm_sq re_0 im_0 ... re_{D-1} im_{D-1}\n")
        for s in snapshots:
            flat = np.empty(2 * dim)
            flat[0::2] = s.amplitudes.real
            flat[1::2] = s.amplitudes.imag
            fh.write(f"{s.t:.17g} {s.norm_sq:.17g} " + " ".join(f"{x:.17g}" for x in flat) + "\n")
    return path


def read_snapshots(path: str | Path) -> list[StateVector]:
    data = np.loadtxt(path, comments="#", ndmin=2)
    return [StateVector(row[2::2] + 1j * row[3::2], t=float(row[0])) for row in data]
