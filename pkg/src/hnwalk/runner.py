"""Run an :class:`ExperimentConfig`: one output subdirectory per sweep point.

Each point directory holds ``params.json`` plus the requested tables; every
table starts with a ``# params:`` header echoing the point's parameters. The
run root gets ``manifest.json`` listing each file with its SHA-256.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import HNWalkError, RunError
from .fock import LatticeParams, build_basis
from .hamiltonian import build_hamiltonian, export_coo
from .observables import (
    frame,
    frame_violations,
    write_correlator_table,
    write_density_table,
    write_scalar_table,
)
from .propagator import evolve, initial_center, initial_state, write_snapshots
from .qfi import fit_summary, qfi_series, write_qfi_table

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-8


def point_label(index: int, params: LatticeParams, swept: list[str]) -> str:
    parts = [f"p{index:02d}"] + [f"{k}={getattr(params, k):g}" for k in swept]
    return "_".join(parts)


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_point(config: ExperimentConfig, params: LatticeParams, outdir: Path) -> dict:
    """Simulate one parameter point and write its tables; returns its manifest entry."""
    outdir.mkdir(parents=True, exist_ok=True)
    header = {**params.as_dict(), "initial_state": config.initial_state, **config.schedule.as_dict()}
    obs = config.observables
    written: list[Path] = []
    violations: list[str] = []

    (outdir / "params.json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    written.append(outdir / "params.json")

    basis = build_basis(params)
    H = build_hamiltonian(basis, params)
    psi0 = initial_state(basis, config.initial_state)
    snaps = evolve(H, psi0, config.schedule)
    center = initial_center(basis, config.initial_state)

    if params.delta == 0:
        drift = max(abs(s.norm_sq - 1.0) for s in snaps)
        if drift >= UNITARITY_TOL:
            violations.append(f"Hermitian norm drift {drift:.2e}")

    frames = [frame(s, basis, center, with_correlator=False) for s in snaps]
    for fr in frames:
        violations.extend(frame_violations(fr, params.N))
    written.append(write_scalar_table(outdir / "scalars.tsv", frames, header))

    if obs.density or obs.decomposition:
        written.append(write_density_table(outdir / "density.tsv", frames, header))

    if obs.correlator and params.N == 2:
        times = config.schedule.times
        k = len(times) - 1 if obs.correlator_time is None else int(np.argmin(np.abs(times - obs.correlator_time)))
        fr = frame(snaps[k], basis, center, with_correlator=True)
        violations.extend(frame_violations(fr, params.N))
        written.append(write_correlator_table(outdir / "correlator.tsv", fr, header))

    if obs.snapshots:
        written.append(write_snapshots(outdir / "snapshots.txt", snaps, basis))
    if obs.matrix:
        written.append(export_coo(H, outdir / "hamiltonian.coo"))

    if obs.qfi:
        series = qfi_series(params, psi0, config.schedule, epsilon=obs.qfi_epsilon, window=obs.qfi_window)
        if abs(series.fq[0]) > 1e-9:
            violations.append(f"F_Q(0) = {series.fq[0]:.3e}")
        if series.fq.min() < -1e-9:
            violations.append(f"negative F_Q {series.fq.min():.3e}")
        written.append(write_qfi_table(outdir / "qfi.tsv", series, header))
        summary = {"params": header, **fit_summary(series)}
        (outdir / "qfi_fit.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        written.append(outdir / "qfi_fit.json")

    return {
        "dir": outdir.name,
        "params": header,
        "files": {p.name: sha256(p) for p in written},
        "violations": violations,
    }


def _run_point_safe(args) -> dict:
    config, params, outdir = args
    try:
        return run_point(config, params, outdir)
    except HNWalkError as exc:
        return {"dir": outdir.name, "params": params.as_dict(), "files": {},
                "violations": [], "error": f"{type(exc).__name__}: {exc}"}


def run(config: ExperimentConfig) -> dict:
    """Execute every sweep point; writes and returns the run manifest.

    Raises :class:`RunError` naming the first failing sweep point after the
    manifest has been written.
    """
    root = config.resolved_output_dir()
    root.mkdir(parents=True, exist_ok=True)
    swept = [name for name, _ in config.sweep]
    jobs = [
        (config, p, root / point_label(k, p, swept))
        for k, p in enumerate(config.sweep_points())
    ]
    log.info("running %d sweep point(s) into %s", len(jobs), root)
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            entries = list(pool.map(_run_point_safe, jobs))
    else:
        entries = [_run_point_safe(j) for j in jobs]

    manifest = {
        "config": config.to_dict(),
        "points": entries,
        "ok": all("error" not in e and not e["violations"] for e in entries),
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    failed = [e for e in entries if "error" in e]
    if failed:
        raise RunError(f"sweep point {failed[0]['dir']} failed: {failed[0]['error']}")
    return manifest


def verify_manifest(root: str | Path) -> list[str]:
    """Re-hash every listed file and compare headers; returns mismatches."""
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    problems = []
    for entry in manifest["points"]:
        expected = json.dumps(entry["params"], sort_keys=True)
        for name, digest in entry["files"].items():
            path = root / entry["dir"] / name
            if not path.exists():
                problems.append(f"missing {path}")
                continue
            if sha256(path) != digest:
                problems.append(f"checksum mismatch {path}")
            if path.suffix == ".tsv":
                first = path.open().readline().strip()
                if first != f"# params: {expected}":
                    problems.append(f"header mismatch {path}")
    return problems
