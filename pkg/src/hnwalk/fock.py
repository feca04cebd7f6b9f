"""Bosonic Fock basis for one or two particles on an open chain.

Sites are labelled ``1..L``. A basis state is stored as the sorted tuple of
occupied sites, one entry per boson: ``(i,)`` for one particle and ``(i, j)``
with ``i <= j`` for two. Bosonic normalization factors are never stored in
the basis; they are produced on demand by :func:`amplitude_factor`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .errors import ParameterError

Occupation = tuple[int, ...]


@dataclass(frozen=True)
class LatticeParams:
    """Physical parameters of the tilted Hatano-Nelson-Bose-Hubbard chain.

    ``delta`` is the hopping non-reciprocity, ``U`` the on-site interaction
    and ``F`` the tilt (energy per site), all in units of the bare hopping.
    """

    L: int
    delta: float = 0.0
    U: float = 0.0
    F: float = 0.0
    N: int = 2

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ParameterError(f"L must be an integer, got {self.L!r}")
        if self.L < 2:
            raise ParameterError(f"L must be >= 2, got {self.L}")
        if self.N not in (1, 2):
            raise ParameterError(f"N must be 1 or 2, got {self.N!r}")
        for name in ("delta", "U", "F"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if not abs(self.delta) < 1:
            raise ParameterError(f"|delta| must be < 1, got {self.delta}")

    def replace(self, **changes) -> LatticeParams:
        values = {k: getattr(self, k) for k in ("L", "delta", "U", "F", "N")}
        values.update(changes)
        return LatticeParams(**values)

    def as_dict(self) -> dict:
        return {"L": int(self.L), "delta": float(self.delta), "U": float(self.U),
                "F": float(self.F), "N": int(self.N)}


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Ordered symmetric basis; ``states`` are lexicographic on ``(i, j)``."""

    N: int
    L: int
    states: tuple[Occupation, ...]
    index_of: dict[Occupation, int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, *sites: int) -> int:
        return self.index_of[tuple(sorted(sites))]

    @property
    def occupations(self) -> np.ndarray:
        """Integer array ``occ[k, i-1]`` = bosons on site ``i`` in state ``k``."""
        occ = self.__dict__.get("_occ")
        if occ is None:
            occ = np.zeros((self.dimension, self.L), dtype=np.int64)
            for k, state in enumerate(self.states):
                for site in state:
                    occ[k, site - 1] += 1
            occ.setflags(write=False)
            object.__setattr__(self, "_occ", occ)
        return occ

    @property
    def doublon_indices(self) -> np.ndarray:
        """Basis index of ``(i, i)`` for ``i = 1..L`` (two-boson basis only)."""
        if self.N != 2:
            raise ParameterError("doublon states exist only in the N=2 basis")
        return np.array([self.index_of[(i, i)] for i in range(1, self.L + 1)])


def build_basis(params: LatticeParams) -> FockBasis:
    """Enumerate all occupations of ``params.N`` bosons on ``params.L`` sites."""
    if params.N not in (1, 2) or params.L < 2:
        raise ParameterError(f"unsupported sector N={params.N}, L={params.L}")
    sites = range(1, params.L + 1)
    states = tuple(combinations_with_replacement(sites, params.N))
    index_of = {s: k for k, s in enumerate(states)}
    return FockBasis(N=params.N, L=params.L, states=states, index_of=index_of)


def amplitude_factor(
    state: Occupation, site: int, action: str
) -> tuple[float, Occupation | None]:
    """Apply ``a_site^dagger`` (``"create"``) or ``a_site`` (``"annihilate"``).

    Returns the bosonic matrix element and the resulting sorted occupation.
    Annihilating an empty site gives ``(0.0, None)``.
    """
    if site < 1:
        raise ParameterError(f"site labels start at 1, got {site}")
    n = state.count(site)
    if action == "create":
        return math.sqrt(n + 1), tuple(sorted(state + (site,)))
    if action == "annihilate":
        if n == 0:
            return 0.0, None
        rest = list(state)
        rest.remove(site)
        return math.sqrt(n), tuple(rest)
    raise ParameterError(f"action must be 'create' or 'annihilate', got {action!r}")
