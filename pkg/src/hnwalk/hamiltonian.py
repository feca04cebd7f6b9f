"""Sparse non-Hermitian Hatano-Nelson-Bose-Hubbard Hamiltonian.

    H = -sum_{i=1}^{L-1} [(1 - delta) a+_{i+1} a_i + (1 + delta) a+_i a_{i+1}]
        + U/2 sum_i n_i (n_i - 1) + F sum_i i n_i

Open boundaries. All site sums run over 1..L (the interaction sum is
sometimes printed from 0; site 0 does not exist on this chain).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, ShapeError
from .fock import FockBasis, LatticeParams, amplitude_factor


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    matrix: sp.csr_matrix
    params: LatticeParams

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


def diagonal_energies(basis: FockBasis, params: LatticeParams) -> np.ndarray:
    """Interaction plus tilt energy of every basis occupation."""
    occ = basis.occupations
    sites = np.arange(1, basis.L + 1)
    return 0.5 * params.U * (occ * (occ - 1)).sum(axis=1) + params.F * (occ @ sites)


def build_hamiltonian(basis: FockBasis, params: LatticeParams) -> SparseHamiltonian:
    if basis.L != params.L or basis.N != params.N:
        raise ParameterError(
            f"basis (L={basis.L}, N={basis.N}) does not match params "
            f"(L={params.L}, N={params.N})"
        )
    right = -(1.0 - params.delta)  # a+_{i+1} a_i
    left = -(1.0 + params.delta)  # a+_i a_{i+1}

    rows, cols, vals = [], [], []
    for k, state in enumerate(basis.states):
        for site in set(state):
            f_out, rest = amplitude_factor(state, site, "annihilate")
            for target, amp in ((site + 1, right), (site - 1, left)):
                if not 1 <= target <= basis.L:
                    continue
                f_in, new = amplitude_factor(rest, target, "create")
                rows.append(basis.index_of[new])
                cols.append(k)
                vals.append(amp * f_out * f_in)

    diag = diagonal_energies(basis, params)
    idx = np.arange(basis.dimension)
    rows = np.concatenate([np.asarray(rows, dtype=np.int64), idx])
    cols = np.concatenate([np.asarray(cols, dtype=np.int64), idx])
    vals = np.concatenate([np.asarray(vals, dtype=float), diag])
    n = basis.dimension
    matrix = sp.coo_matrix((vals.astype(complex), (rows, cols)), shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    return SparseHamiltonian(matrix=matrix, params=params)


def apply(H: SparseHamiltonian, v):
    """Return ``H @ v`` as a :class:`~hnwalk.propagator.StateVector`."""
    from .propagator import StateVector

    amps = v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=complex)
    if amps.shape != (H.dimension,):
        raise ShapeError(f"vector of shape {amps.shape} for dimension {H.dimension}")
    t = v.t if isinstance(v, StateVector) else 0.0
    return StateVector(H.matrix @ amps, t=t)


def export_coo(H: SparseHamiltonian, path: str | Path) -> Path:
    """Write nonzero entries as ``row col re im`` lines (0-based indices)."""
    path = Path(path)
    coo = H.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    p = H.params
    with path.open("w") as fh:
        fh.write(f"# dimension {H.dimension}\n")
        fh.write(f"# L={p.L} N={p.N} delta={p.delta!r} U={p.U!r} F={p.F!r}\n")
        fh.write("# row col re im\n")
        for k in order:
            z = coo.data[k]
            fh.write(f"{coo.row[k]} {coo.col[k]} {z.real:.17g} {z.imag:.17g}\n")
    return path


def load_coo(path: str | Path) -> sp.csr_matrix:
    data = np.loadtxt(path, comments="#", ndmin=2)
    with Path(path).open() as fh:
        n = int(fh.readline().split()[2])
    rows, cols = data[:, 0].astype(int), data[:, 1].astype(int)
    return sp.csr_matrix((data[:, 2] + 1j * data[:, 3], (rows, cols)), shape=(n, n))
