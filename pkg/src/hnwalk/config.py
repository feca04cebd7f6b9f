"""Experiment configuration, JSON (de)serialization and figure presets.

A config file is a JSON object::

    {
      "name": "fig1-a1",
      "params": {"L": 70, "delta": 0.0, "U": 2.0, "F": 0.0, "N": 2},
      "initial_state": "neighboring",
      "schedule": {"t_max": 15.0, "n_snapshots": 151, "dt": 0.001,
                   "method": "stepped", "self_check": true, "check_tol": 1e-8},
      "observables": {"density": true, "decomposition": true,
                      "correlator": false, "correlator_time": null,
                      "qfi": false, "qfi_epsilon": null, "qfi_window": null,
                      "snapshots": false, "matrix": false},
      "sweep": [["delta", [0.0, 0.02, 0.04, 0.08]]],
      "output_dir": null,
      "workers": 1
    }

Several sweep entries are combined as a Cartesian product. A null
``output_dir`` resolves to ``$HNWALK_OUTPUT_ROOT/<name>`` (default root
``runs``).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import product
from pathlib import Path

from .errors import ConfigError, ParameterError
from .fock import LatticeParams
from .propagator import INITIAL_KINDS, EvolutionSchedule

SWEEPABLE = ("delta", "U", "F")
OUTPUT_ROOT_ENV = "HNWALK_OUTPUT_ROOT"

DELTA_SWEEP = [0.0, 0.02, 0.04, 0.08]
U_SWEEP = [0.0, 2.0, 5.0, 10.0]
F_TILT = 0.26
L_DEFAULT = 70


@dataclass(frozen=True)
class ObservableSelection:
    density: bool = True
    decomposition: bool = True
    correlator: bool = False
    correlator_time: float | None = None
    qfi: bool = False
    qfi_epsilon: float | None = None
    qfi_window: tuple[float, float] | None = None
    snapshots: bool = False
    matrix: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    params: LatticeParams
    initial_state: str
    schedule: EvolutionSchedule
    observables: ObservableSelection = field(default_factory=ObservableSelection)
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    output_dir: str | None = None
    workers: int = 1
    name: str = "custom"

    def sweep_points(self) -> list[LatticeParams]:
        if not self.sweep:
            return [self.params]
        names = [n for n, _ in self.sweep]
        return [
            self.params.replace(**dict(zip(names, combo)))
            for combo in product(*(vals for _, vals in self.sweep))
        ]

    def resolved_output_dir(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / self.name

    def to_dict(self) -> dict:
        obs = asdict(self.observables)
        if obs["qfi_window"] is not None:
            obs["qfi_window"] = list(obs["qfi_window"])
        return {
            "name": self.name,
            "params": self.params.as_dict(),
            "initial_state": self.initial_state,
            "schedule": self.schedule.as_dict(),
            "observables": obs,
            "sweep": [[n, list(v)] for n, v in self.sweep],
            "output_dir": self.output_dir,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        return _parse(data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ConfigError(msg, path)


def _real(value, path: str) -> float:
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), path, f"expected a number, got {value!r}")
    _expect(math.isfinite(value), path, "must be finite")
    return float(value)


def _integer(value, path: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), path, f"expected an integer, got {value!r}")
    return int(value)


def _boolean(value, path: str) -> bool:
    _expect(isinstance(value, bool), path, f"expected true/false, got {value!r}")
    return value


def _no_extra(section: dict, allowed, path: str) -> None:
    _expect(isinstance(section, dict), path, "expected an object")
    extra = sorted(set(section) - set(allowed))
    _expect(not extra, f"{path}.{extra[0]}" if extra else path, "unknown field")


def _parse(data: dict) -> ExperimentConfig:
    _no_extra(data, [f.name for f in fields(ExperimentConfig)], "config")
    for key in ("params", "initial_state", "schedule"):
        _expect(key in data, key, "missing required field")

    raw = data["params"]
    _no_extra(raw, ("L", "delta", "U", "F", "N"), "params")
    _expect("L" in raw, "params.L", "missing required field")
    pvals = {"L": _integer(raw["L"], "params.L"), "N": _integer(raw.get("N", 2), "params.N")}
    for k in ("delta", "U", "F"):
        pvals[k] = _real(raw.get(k, 0.0), f"params.{k}")
    _expect(pvals["L"] >= 2, "params.L", "must be >= 2")
    _expect(pvals["N"] in (1, 2), "params.N", "must be 1 or 2")
    _expect(abs(pvals["delta"]) < 1, "params.delta", "|delta| must be < 1")
    params = LatticeParams(**pvals)

    kind = data["initial_state"]
    _expect(kind in INITIAL_KINDS, "initial_state", f"expected one of {list(INITIAL_KINDS)}")
    _expect((kind == "single-center") == (params.N == 1), "initial_state",
            f"{kind!r} is incompatible with N={params.N}")

    raw = data["schedule"]
    _no_extra(raw, [f.name for f in fields(EvolutionSchedule)], "schedule")
    _expect("t_max" in raw, "schedule.t_max", "missing required field")
    skw = {"t_max": _real(raw["t_max"], "schedule.t_max")}
    if "n_snapshots" in raw:
        skw["n_snapshots"] = _integer(raw["n_snapshots"], "schedule.n_snapshots")
    for k in ("dt", "check_tol"):
        if k in raw:
            skw[k] = _real(raw[k], f"schedule.{k}")
    if "self_check" in raw:
        skw["self_check"] = _boolean(raw["self_check"], "schedule.self_check")
    if "method" in raw:
        skw["method"] = raw["method"]
    try:
        schedule = EvolutionSchedule(**skw)
    except ParameterError as exc:
        raise ConfigError(str(exc), "schedule") from None

    raw = data.get("observables", {})
    _no_extra(raw, [f.name for f in fields(ObservableSelection)], "observables")
    okw = {}
    for k in ("density", "decomposition", "correlator", "qfi", "snapshots", "matrix"):
        if k in raw:
            okw[k] = _boolean(raw[k], f"observables.{k}")
    for k in ("correlator_time", "qfi_epsilon"):
        if raw.get(k) is not None:
            okw[k] = _real(raw[k], f"observables.{k}")
    if okw.get("qfi_epsilon") is not None:
        _expect(okw["qfi_epsilon"] > 0, "observables.qfi_epsilon", "must be > 0")
    if raw.get("qfi_window") is not None:
        w = raw["qfi_window"]
        _expect(isinstance(w, (list, tuple)) and len(w) == 2, "observables.qfi_window", "expected [t_lo, t_hi]")
        lo, hi = (_real(x, "observables.qfi_window") for x in w)
        _expect(0 < lo < hi, "observables.qfi_window", "need 0 < t_lo < t_hi")
        okw["qfi_window"] = (lo, hi)
    observables = ObservableSelection(**okw)

    raw_sweep = data.get("sweep") or []
    _expect(isinstance(raw_sweep, list), "sweep", "expected a list of [name, values] pairs")
    sweep = []
    seen = set()
    for k, entry in enumerate(raw_sweep):
        path = f"sweep[{k}]"
        _expect(isinstance(entry, (list, tuple)) and len(entry) == 2, path, "expected [name, values]")
        name, values = entry
        _expect(name in SWEEPABLE, f"{path}.name", f"sweep parameter must be one of {list(SWEEPABLE)}")
        _expect(name not in seen, f"{path}.name", f"{name!r} swept twice")
        seen.add(name)
        _expect(isinstance(values, (list, tuple)) and len(values) > 0, f"{path}.values", "expected a non-empty list")
        vals = tuple(_real(v, f"{path}.values[{m}]") for m, v in enumerate(values))
        if name == "delta":
            _expect(all(abs(v) < 1 for v in vals), f"{path}.values", "|delta| must be < 1")
        sweep.append((name, vals))

    out = data.get("output_dir")
    _expect(out is None or isinstance(out, str), "output_dir", "expected a path string or null")
    workers = _integer(data.get("workers", 1), "workers")
    _expect(workers >= 1, "workers", "must be >= 1")
    name = data.get("name", "custom")
    _expect(isinstance(name, str) and name != "", "name", "expected a non-empty string")

    return ExperimentConfig(
        params=params, initial_state=kind, schedule=schedule, observables=observables,
        sweep=tuple(sweep), output_dir=out, workers=workers, name=name,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(config.dumps() + "\n")
    return path


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply ``dotted.key=value`` edits; values are parsed as JSON when possible.

    ``sweep.<name>=[...]`` sets (or with ``[]`` removes) one sweep entry.
    """
    data = config.to_dict()
    for item in overrides:
        key, sep, text = item.partition("=")
        _expect(bool(sep) and bool(key), "override", f"expected key=value, got {item!r}")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = key.split(".")
        if parts[0] == "sweep" and len(parts) == 2:
            entries = [e for e in data["sweep"] if e[0] != parts[1]]
            if value != []:
                entries.append([parts[1], value if isinstance(value, list) else [value]])
            data["sweep"] = entries
            continue
        node = data
        for p in parts[:-1]:
            _expect(isinstance(node.get(p), dict), key, "no such section")
            node = node[p]
        node[parts[-1]] = value
    return ExperimentConfig.from_dict(data)


# --- figure presets ---------------------------------------------------------

def _bloch_period(F: float) -> float:
    return 2 * math.pi / F


def _walk_preset(name: str, fig: int, panel: str) -> ExperimentConfig:
    tilted = fig in (3, 4)
    F = F_TILT if tilted else 0.0
    kind = "neighboring" if panel.startswith("a") else "same-site"
    if panel.endswith("1"):
        params = LatticeParams(L=L_DEFAULT, delta=0.0, U=2.0, F=F, N=2)
        sweep = (("delta", tuple(DELTA_SWEEP)),)
    else:
        params = LatticeParams(L=L_DEFAULT, delta=0.04, U=2.0, F=F, N=2)
        sweep = (("U", tuple(U_SWEEP)),)
    if tilted:
        schedule = EvolutionSchedule(t_max=2 * _bloch_period(F), n_snapshots=484)
    else:
        schedule = EvolutionSchedule(t_max=15.0, n_snapshots=151)
    correlations = fig in (2, 4)
    observables = ObservableSelection(density=True, decomposition=True, correlator=correlations)
    return ExperimentConfig(params=params, initial_state=kind, schedule=schedule,
                            observables=observables, sweep=sweep, name=name)


def _qfi_preset(name: str, panel: str) -> ExperimentConfig:
    N, kind = {"a": (1, "single-center"), "b": (2, "neighboring"), "c": (2, "same-site")}[panel]
    params = LatticeParams(L=L_DEFAULT, delta=0.0, U=2.0, F=F_TILT, N=N)
    schedule = EvolutionSchedule(t_max=0.5 * _bloch_period(F_TILT), n_snapshots=121)
    observables = ObservableSelection(density=True, decomposition=N == 2, qfi=True)
    return ExperimentConfig(params=params, initial_state=kind, schedule=schedule,
                            observables=observables, sweep=(("delta", tuple(DELTA_SWEEP)),), name=name)


PRESET_NAMES = tuple(
    [f"fig{f}-{p}" for f in (1, 2, 3, 4) for p in ("a1", "a2", "b1", "b2")]
    + ["fig5-a", "fig5-b", "fig5-c"]
)

PRESET_DESCRIPTIONS = {
    "a1": "neighboring start, U=2, delta sweep",
    "a2": "neighboring start, delta=0.04, U sweep",
    "b1": "same-site start, U=2, delta sweep",
    "b2": "same-site start, delta=0.04, U sweep",
}


def describe_preset(name: str) -> str:
    fig, panel = name[3], name.split("-")[1]
    if fig == "5":
        what = {"a": "one boson at the center", "b": "two bosons on neighboring sites",
                "c": "two bosons on the same site"}[panel]
        return f"QFI growth, F=0.26, U=2, delta sweep; {what}"
    kind = {"1": "density", "2": "correlator", "3": "density", "4": "correlator"}[fig]
    tilt = "F=0.26" if fig in "34" else "F=0"
    return f"{kind}, {tilt}; {PRESET_DESCRIPTIONS[panel]}"


def preset(name: str) -> ExperimentConfig:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}", "preset")
    fig, panel = int(name[3]), name.split("-")[1]
    if fig == 5:
        return _qfi_preset(name, panel)
    return _walk_preset(name, fig, panel)


def with_output(config: ExperimentConfig, output_dir: str | None) -> ExperimentConfig:
    return replace(config, output_dir=output_dir)
