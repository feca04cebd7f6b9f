"""Quantum Fisher information of the evolved state with respect to the tilt F.

F_Q is obtained from the fidelity between normalized states evolved at
neighbouring tilts. For unit vectors a, b the deficit
``1 - |<a|b>| = |a - e^{i phi} b|^2 / 2`` (phi aligning the phases) and, to
leading order in the step eps, ``1 - |<psi_F|psi_{F+eps}>| = F_Q eps^2 / 8``.
Averaging the +eps and -eps deficits removes the odd-order error term. Only
moduli of overlaps enter, so global and F-dependent phases drop out, and
working with normalized states keeps norm growth of the non-Hermitian
evolution out of the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ParameterError, ShapeError, StepSizeError, WindowError
from .fock import LatticeParams, build_basis
from .hamiltonian import build_hamiltonian
from .propagator import EvolutionSchedule, StateVector, evolve

MIN_FIT_POINTS = 10
STEP_TOL = 0.01
_DEFICIT_FLOOR = 1e2 * np.finfo(float).eps


class AlphaFit(NamedTuple):
    alpha: float
    residual: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True, eq=False)
class QfiSeries:
    times: np.ndarray
    fq: np.ndarray
    epsilon: float
    params: LatticeParams
    alpha_fit: AlphaFit | None = None
    step_change: float | None = None

    @property
    def reliable(self) -> bool | None:
        """Whether halving epsilon moved F_Q by less than 1% over the fit window."""
        if self.step_change is None:
            return None
        return self.step_change < STEP_TOL


def default_epsilon(F: float) -> float:
    return max(abs(F), 1.0) * 1e-3


def default_window(F: float, t_max: float) -> tuple[float, float]:
    """[0.5, T_B / 2] for a tilted chain, else [0.5, t_max]."""
    if F == 0:
        return (0.5, t_max)
    return (0.5, 0.5 * 2 * math.pi / abs(F))


def _unit_rows(snaps: list[StateVector]) -> np.ndarray:
    amps = np.array([s.amplitudes for s in snaps])
    return amps / np.linalg.norm(amps, axis=1, keepdims=True)


def fidelity_deficit(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``1 - |<a|b>|`` for unit vectors, computed without cancellation."""
    overlap = np.einsum("ij,ij->i", a.conj(), b)
    mag = np.abs(overlap)
    phase = np.where(mag > 0, overlap / np.where(mag > 0, mag, 1.0), 1.0)
    diff = a - b * phase.conj()[:, None]
    return 0.5 * np.einsum("ij,ij->i", diff.conj(), diff).real


def _evolved_unit(params: LatticeParams, F: float, psi0, schedule, basis) -> np.ndarray:
    p = params.replace(F=F)
    return _unit_rows(evolve(build_hamiltonian(basis, p), psi0, schedule))


def _fq_from(center: np.ndarray, plus: np.ndarray, minus: np.ndarray, eps: float) -> np.ndarray:
    return 4.0 * (fidelity_deficit(center, plus) + fidelity_deficit(center, minus)) / eps**2


def qfi_series(
    params: LatticeParams,
    psi0: StateVector,
    schedule: EvolutionSchedule,
    epsilon: float | None = None,
    window: tuple[float, float] | None = None,
    check_step: bool = True,
) -> QfiSeries:
    """F_Q(t) on the schedule's snapshot grid.

    With ``check_step`` the calculation is repeated at ``epsilon / 2`` and the
    largest relative change inside the fit window is stored as
    ``step_change``.
    """
    eps = default_epsilon(params.F) if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ParameterError(f"epsilon must be > 0, got {eps}")
    basis = build_basis(params)
    times = schedule.times

    center = _evolved_unit(params, params.F, psi0, schedule, basis)
    plus = _evolved_unit(params, params.F + eps, psi0, schedule, basis)
    minus = _evolved_unit(params, params.F - eps, psi0, schedule, basis)
    d_max = max(fidelity_deficit(center, plus)[1:].max(), fidelity_deficit(center, minus)[1:].max())
    if d_max < _DEFICIT_FLOOR:
        raise StepSizeError(
            f"fidelity deficit {d_max:.1e} is below {_DEFICIT_FLOOR:.0e} for epsilon={eps:g}; "
            "increase epsilon (or t_max)"
        )
    fq = _fq_from(center, plus, minus, eps)

    window = window or default_window(params.F, float(times[-1]))
    series = QfiSeries(times=times, fq=fq, epsilon=eps, params=params)
    try:
        fit = fit_alpha(series, window)
    except WindowError:
        fit = None

    change = None
    if check_step:
        h = eps / 2
        plus_h = _evolved_unit(params, params.F + h, psi0, schedule, basis)
        minus_h = _evolved_unit(params, params.F - h, psi0, schedule, basis)
        fq_h = _fq_from(center, plus_h, minus_h, h)
        sel = (times >= window[0]) & (times <= window[1]) & (fq > 0)
        if not sel.any():
            sel = (times > 0) & (fq > 0)
        if sel.any():
            change = float(np.max(np.abs(fq_h[sel] / fq[sel] - 1.0)))
    return QfiSeries(times=times, fq=fq, epsilon=eps, params=params, alpha_fit=fit, step_change=change)


def fit_alpha(series: QfiSeries, window: tuple[float, float]) -> AlphaFit:
    """Least-squares slope of log F_Q against log t inside ``window``."""
    lo, hi = window
    t = np.asarray(series.times)
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < MIN_FIT_POINTS:
        raise WindowError(f"only {int(sel.sum())} samples in window {window}; need {MIN_FIT_POINTS}")
    fq = np.asarray(series.fq)[sel]
    if np.any(fq <= 0) or np.any(t[sel] <= 0):
        raise WindowError(f"nonpositive samples in window {window}")
    x, y = np.log(t[sel]), np.log(fq)
    (slope, intercept), *_ = np.linalg.lstsq(np.vstack([x, np.ones_like(x)]).T, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return AlphaFit(float(slope), resid, (float(lo), float(hi)), int(sel.sum()))


def running_alpha(series: QfiSeries) -> np.ndarray:
    """Local slope d log F_Q / d log t; NaN where undefined."""
    t, fq = np.asarray(series.times), np.asarray(series.fq)
    out = np.full(t.shape, np.nan)
    ok = (t > 0) & (fq > 0)
    if ok.sum() >= 2:
        out[ok] = np.gradient(np.log(fq[ok]), np.log(t[ok]))
    return out


def delta_metric(series_hermitian: QfiSeries, series_nonhermitian: QfiSeries, t: float) -> float:
    """``F_Q/(4 t^2)`` at delta = 0 minus the same quantity for the other series."""
    a, b = np.asarray(series_hermitian.times), np.asarray(series_nonhermitian.times)
    if a.shape != b.shape or not np.allclose(a, b, rtol=0, atol=1e-12):
        raise ShapeError("QFI series are on different time grids")
    if t == 0:
        raise DomainError("delta metric is undefined at t = 0")
    fa = np.interp(t, a, series_hermitian.fq)
    fb = np.interp(t, b, series_nonhermitian.fq)
    return float((fa - fb) / (4.0 * t * t))


def cramer_rao_bound(fq: float) -> float:
    if not fq > 0:
        raise DomainError(f"Cramer-Rao bound needs F_Q > 0, got {fq}")
    return 1.0 / math.sqrt(fq)


def write_qfi_table(path: str | Path, series: QfiSeries, params: dict) -> Path:
    path = Path(path)
    alpha = running_alpha(series)
    with path.open("w") as fh:
        fh.write(f"# params: {json.dumps(params, sort_keys=True)}\n")
        fh.write(f"# epsilon: {series.epsilon!r}\n")
        fh.write("# columns: t F_Q cramer_rao running_alpha\n")
        for t, f, a in zip(series.times, series.fq, alpha):
            bound = 1.0 / math.sqrt(f) if f > 0 else math.inf
            fh.write(f"{t:.6f}\t{f:.12e}\t{bound:.12e}\t{a:.6f}\n")
    return path


def fit_summary(series: QfiSeries) -> dict:
    fit = series.alpha_fit
    return {
        "epsilon": series.epsilon,
        "window": list(fit.window) if fit else None,
        "alpha": fit.alpha if fit else None,
        "residual": fit.residual if fit else None,
        "n_points": fit.n_points if fit else 0,
        "step_change": series.step_change,
        "reliable": series.reliable,
    }
