"""Site-resolved observables of one- and two-boson snapshots.

All evaluators take a normalized state. For a two-boson amplitude ``c_k`` on
basis state ``(i, j)``:

* density ``n_i`` counts ``|c_k|^2`` once per boson on ``i``,
* doublon density ``n_i^(2) = <n_i (n_i - 1)> = 2 |c_(i,i)|^2``,
* correlator ``G_ij = <a+_i a+_j a_i a_j>``, i.e. ``<n_i n_j>`` off the
  diagonal and ``<n_i (n_i - 1)>`` on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ContractError, ParameterError
from .fock import FockBasis
from .propagator import StateVector, normalized

NORM_TOL = 1e-9


def _probabilities(psi: StateVector, basis: FockBasis) -> np.ndarray:
    if psi.dimension != basis.dimension:
        raise ContractError(f"state dimension {psi.dimension} != basis dimension {basis.dimension}")
    if abs(psi.norm_sq - 1.0) > NORM_TOL:
        raise ContractError(f"observable needs a normalized state, got norm_sq={psi.norm_sq:.6g}")
    return np.abs(psi.amplitudes) ** 2


def density(psi: StateVector, basis: FockBasis) -> np.ndarray:
    return _probabilities(psi, basis) @ basis.occupations


def doublon_density(psi: StateVector, basis: FockBasis) -> np.ndarray:
    if basis.N != 2:
        raise ParameterError("doublon density is defined for N=2 only")
    p = _probabilities(psi, basis)
    return 2.0 * p[basis.doublon_indices]


def correlator(psi: StateVector, basis: FockBasis) -> np.ndarray:
    if basis.N != 2:
        raise ParameterError("the two-particle correlator is defined for N=2 only")
    p = _probabilities(psi, basis)
    i, j = np.array(basis.states).T - 1
    G = np.zeros((basis.L, basis.L))
    off = i != j
    G[i[off], j[off]] = p[off]
    G[j[off], i[off]] = p[off]
    G[i[~off], i[~off]] = 2.0 * p[~off]
    return G


def asymmetry(density: np.ndarray, center: float) -> float:
    """``(right - left) / N`` with the halves taken strictly either side of ``center``.

    ``center`` may be a site label or a bond midpoint such as 35.5.
    """
    n = np.asarray(density, dtype=float)
    sites = np.arange(1, n.shape[0] + 1)
    total = n.sum()
    if total <= 0:
        return 0.0
    return float((n[sites > center].sum() - n[sites < center].sum()) / total)


def position_mean(density: np.ndarray) -> float:
    n = np.asarray(density, dtype=float)
    return float(np.arange(1, n.shape[0] + 1) @ n / n.sum())


def position_spread(density: np.ndarray) -> float:
    """Variance of the site label under the (renormalized) profile."""
    n = np.asarray(density, dtype=float)
    sites = np.arange(1, n.shape[0] + 1)
    w = n / n.sum()
    mean = sites @ w
    return float(((sites - mean) ** 2) @ w)


class PeriodEstimate(NamedTuple):
    period: float
    sharpness: float


def oscillation_period(
    series, dt: float, min_sharpness: float = 10.0, pad_factor: int = 16
) -> PeriodEstimate | None:
    """Dominant period of a uniformly sampled series.

    Hann-windowed, zero-padded spectrum of the mean-subtracted series; the
    strongest peak with at least one full cycle in the record is refined by
    a parabola through the log-magnitudes of the three neighbouring bins.
    ``sharpness`` is the peak over the median spectral magnitude. Returns
    ``None`` when there is no peak above ``min_sharpness``.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.shape[0] < 8:
        raise ParameterError("need a 1-D series of at least 8 samples")
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    x = x - x.mean()
    if np.max(np.abs(x)) == 0.0:
        return None
    n = x.shape[0]
    nfft = pad_factor * (1 << (n - 1).bit_length())
    mag = np.abs(np.fft.rfft(x * np.hanning(n), nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    allowed = np.flatnonzero(freqs >= 1.0 / (n * dt))
    allowed = allowed[allowed < mag.shape[0] - 1]
    if allowed.size < 3:
        return None
    k = allowed[np.argmax(mag[allowed])]
    floor = np.median(mag[allowed])
    sharpness = float(mag[k] / floor) if floor > 0 else math.inf
    if sharpness < min_sharpness:
        return None
    a, b, c = np.log(mag[k - 1 : k + 2] + 1e-300)
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    f_peak = freqs[k] + shift * (freqs[1] - freqs[0])
    return PeriodEstimate(period=float(1.0 / f_peak), sharpness=sharpness)


@dataclass(frozen=True, eq=False)
class ObservableFrame:
    t: float
    density: np.ndarray
    doublon_density: np.ndarray
    single_density: np.ndarray
    correlator: np.ndarray | None
    asymmetry: float
    norm_sq: float


def frame(psi: StateVector, basis: FockBasis, center: float, with_correlator: bool = True) -> ObservableFrame:
    """All observables of a raw snapshot; normalization happens here."""
    unit = normalized(psi)
    n = density(unit, basis)
    if basis.N == 2:
        n2 = doublon_density(unit, basis)
        G = correlator(unit, basis) if with_correlator else None
    else:
        n2 = np.zeros(basis.L)
        G = None
    return ObservableFrame(
        t=psi.t,
        density=n,
        doublon_density=n2,
        single_density=n - n2,
        correlator=G,
        asymmetry=asymmetry(n, center),
        norm_sq=psi.norm_sq,
    )


def frame_violations(fr: ObservableFrame, N: int) -> list[str]:
    """Sum-rule and symmetry checks on one frame; empty when all hold."""
    bad = []
    if abs(fr.density.sum() - N) > 1e-9:
        bad.append(f"t={fr.t:g}: sum(n)={fr.density.sum():.12g} != {N}")
    if np.min(fr.single_density) < -1e-12:
        bad.append(f"t={fr.t:g}: negative single-particle density")
    if fr.correlator is not None:
        G = fr.correlator
        if abs(G.sum() - 2.0) > 1e-9:
            bad.append(f"t={fr.t:g}: sum(Gamma)={G.sum():.12g} != 2")
        if np.max(np.abs(G - G.T)) > 1e-12:
            bad.append(f"t={fr.t:g}: Gamma not symmetric")
    return bad


def _header(fh, params: dict, columns: str) -> None:
    fh.write(f"# params: {json.dumps(params, sort_keys=True)}\n")
    fh.write(f"# columns: {columns}\n")


def write_density_table(path: str | Path, frames: list[ObservableFrame], params: dict) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        _header(fh, params, "t site n n1 n2")
        for fr in frames:
            for i in range(fr.density.shape[0]):
                fh.write(
                    f"{fr.t:.6f}\t{i + 1}\t{fr.density[i]:.12e}\t"
                    f"{fr.single_density[i]:.12e}\t{fr.doublon_density[i]:.12e}\n"
                )
    return path


def write_correlator_table(path: str | Path, fr: ObservableFrame, params: dict) -> Path:
    path = Path(path)
    L = fr.correlator.shape[0]
    with path.open("w") as fh:
        _header(fh, params, "t i j Gamma")
        for i in range(L):
            for j in range(L):
                fh.write(f"{fr.t:.6f}\t{i + 1}\t{j + 1}\t{fr.correlator[i, j]:.12e}\n")
    return path


def write_scalar_table(path: str | Path, frames: list[ObservableFrame], params: dict) -> Path:
    """Per-snapshot scalars: norm, asymmetry, position mean and spread."""
    path = Path(path)
    with path.open("w") as fh:
        _header(fh, params, "t norm_sq asymmetry x_mean x_spread")
        for fr in frames:
            fh.write(
                f"{fr.t:.6f}\t{fr.norm_sq:.12e}\t{fr.asymmetry:.12e}\t"
                f"{position_mean(fr.density):.12e}\t{position_spread(fr.density):.12e}\n"
            )
    return path
