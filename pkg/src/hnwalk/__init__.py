"""One- and two-boson quantum walks on the tilted Hatano-Nelson chain."""

from .fock import FockBasis, LatticeParams, amplitude_factor, build_basis
from .hamiltonian import SparseHamiltonian, apply, build_hamiltonian
from .observables import (
    ObservableFrame,
    asymmetry,
    correlator,
    density,
    doublon_density,
    oscillation_period,
    position_spread,
)
from .propagator import EvolutionSchedule, StateVector, evolve, initial_state, normalized
from .qfi import QfiSeries, cramer_rao_bound, delta_metric, fit_alpha, qfi_series

__version__ = "0.1.0"

__all__ = [
    "EvolutionSchedule", "FockBasis", "LatticeParams", "ObservableFrame", "QfiSeries",
    "SparseHamiltonian", "StateVector", "amplitude_factor", "apply", "asymmetry",
    "build_basis", "build_hamiltonian", "correlator", "cramer_rao_bound", "delta_metric",
    "density", "doublon_density", "evolve", "fit_alpha", "initial_state", "normalized",
    "oscillation_period", "position_spread", "qfi_series",
]
