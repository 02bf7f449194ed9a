"""Run configuration files: loading, validation, and resolution.

A run is described by one TOML or JSON file with sections [paths], [physics],
[acquisition], [network], [training], [diagnostics] and optionally [sweep].
Values resolve to the domain objects of the other modules; every default is
materialized into a canonical dict whose hash names the output directory, and
a copy of that resolved dict is written next to the artifacts.

Relative paths inside a config resolve against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .model import (
    VelocityModel,
    constant_model,
    downsample,
    gaussian_smooth,
    linear_model,
    load_model,
    synthetic_marmousi,
)
from .optimize import TRAINING_MODES, NetworkConfig, TrainingConfig
from .wavesim import (
    AcquisitionGeometry,
    SimConfig,
    SourceWavelet,
    ricker,
    surface_line_geometry,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["RunConfig", "load_config", "parse_config", "load_run_config", "config_hash"]


def load_config(path: str | Path) -> dict:
    """Read a raw TOML (.toml) or JSON (.json) config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        if path.suffix == ".json":
            with open(path) as f:
                return json.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    raise ConfigurationError(f"config must be a .toml or .json file, got '{path.suffix}'")


class _Section:
    """Typed key access with 'section.key' error messages."""

    def __init__(self, name: str, data: dict):
        if not isinstance(data, dict):
            raise ConfigurationError(f"{name}: expected a table/object")
        self.name = name
        self.data = dict(data)
        self.seen: set[str] = set()

    def _convert(self, key, value, kind):
        where = f"{self.name}.{key}"
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigurationError(f"{where}: expected a number, got {value!r}")
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
            return value
        if kind is bool:
            if not isinstance(value, bool):
                raise ConfigurationError(f"{where}: expected true/false, got {value!r}")
            return value
        if kind is str:
            if not isinstance(value, str):
                raise ConfigurationError(f"{where}: expected a string, got {value!r}")
            return value
        if kind is list:
            if not isinstance(value, list):
                raise ConfigurationError(f"{where}: expected a list, got {value!r}")
            return value
        return value  # "any"

    def get(self, key: str, kind, default):
        self.seen.add(key)
        if key not in self.data or self.data[key] is None:
            return default
        return self._convert(key, self.data[key], kind)

    def require(self, key: str, kind):
        self.seen.add(key)
        if key not in self.data or self.data[key] is None:
            raise ConfigurationError(f"{self.name}.{key}: required key is missing")
        return self._convert(key, self.data[key], kind)

    def reject_unknown(self):
        unknown = set(self.data) - self.seen
        if unknown:
            keys = ", ".join(sorted(f"{self.name}.{k}" for k in unknown))
            raise ConfigurationError(f"unknown config keys: {keys}")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run description."""

    base_dir: Path
    true_model_spec: object  # path string or generator table (None allowed)
    initial_model_spec: object
    observed_dir: str | None
    output_dir: str
    sim: SimConfig
    f_peak: float
    delay: float
    acquisition: dict
    network: NetworkConfig
    training: TrainingConfig | None
    spectrum_columns: list[int] | None
    sweep_epochs: list[int] | None
    sweep_lrs: list[float] | None
    resolved: dict  # canonical dict with all defaults materialized

    # -- resolution to domain objects ---------------------------------------

    def resolve_path(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def _model_from_spec(self, spec, where: str, like: VelocityModel | None) -> VelocityModel:
        if isinstance(spec, str):
            return load_model(self.resolve_path(spec))
        if not isinstance(spec, dict):
            raise ConfigurationError(f"{where}: expected a file path or a generator table")
        kind = spec.get("kind")
        if kind == "file":
            return load_model(self.resolve_path(spec["path"]))
        if kind == "synthetic-marmousi":
            m = synthetic_marmousi(
                nz=int(spec.get("nz", 94)),
                nx=int(spec.get("nx", 288)),
                dz=float(spec.get("dz", 15.0)),
                dx=float(spec.get("dx", 15.0)),
            )
            ds = spec.get("downsample")
            if ds:
                m = downsample(m, int(ds[0]), int(ds[1]))
            return m
        if kind == "smooth":
            if like is None:
                raise ConfigurationError(f"{where}: 'smooth' needs the true model to smooth")
            return gaussian_smooth(like, float(spec["sigma"]))
        if kind in ("linear", "constant"):
            # grid comes from the true model when present, else from the spec
            try:
                if like is not None:
                    grid = (like.nz, like.nx, like.dz, like.dx)
                else:
                    grid = (
                        int(spec["nz"]), int(spec["nx"]),
                        float(spec["dz"]), float(spec["dx"]),
                    )
            except KeyError as missing:
                raise ConfigurationError(
                    f"{where}: '{kind}' needs nz/nx/dz/dx (or a true model to copy the grid from); "
                    f"missing {missing}"
                ) from None
            if kind == "linear":
                return linear_model(*grid, float(spec["v_top"]), float(spec["v_bottom"]))
            return constant_model(*grid, float(spec["velocity"]))
        raise ConfigurationError(
            f"{where}.kind: expected file|synthetic-marmousi|smooth|linear|constant, got {kind!r}"
        )

    def resolve_true_model(self) -> VelocityModel:
        if self.true_model_spec is None:
            raise ConfigurationError("paths.true_model: required for this command")
        return self._model_from_spec(self.true_model_spec, "paths.true_model", like=None)

    def resolve_initial_model(self, true_model: VelocityModel | None) -> VelocityModel:
        if self.initial_model_spec is None:
            raise ConfigurationError("paths.initial_model: required for this command")
        return self._model_from_spec(self.initial_model_spec, "paths.initial_model", like=true_model)

    def build_wavelet(self) -> SourceWavelet:
        return ricker(self.f_peak, self.sim.dt, self.sim.nt, self.delay)

    def build_geometry(self, model: VelocityModel) -> AcquisitionGeometry:
        acq = self.acquisition
        if acq["source_cells"] is not None:
            sources = np.asarray(acq["source_cells"], dtype=np.int64)
            if acq["receiver_cells"] is not None:
                receivers = np.asarray(acq["receiver_cells"], dtype=np.int64)
            else:
                receivers = np.column_stack(
                    [np.full(model.nx, acq["receiver_row"], dtype=np.int64), np.arange(model.nx)]
                )
            return AcquisitionGeometry(sources, receivers)
        return surface_line_geometry(
            model.nz, model.nx, acq["n_sources"],
            source_row=acq["source_row"], receiver_row=acq["receiver_row"],
        )


def parse_config(raw: dict, base_dir: str | Path = ".") -> RunConfig:
    """Validate a raw config dict and materialize every default."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a table/object")
    known = {"paths", "physics", "acquisition", "network", "training", "diagnostics", "sweep"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown config sections: {', '.join(sorted(unknown))}")

    paths = _Section("paths", raw.get("paths", {}))
    true_spec = paths.get("true_model", object, None)
    init_spec = paths.get("initial_model", object, None)
    observed_dir = paths.get("observed_dir", str, None)
    output_dir = paths.get("output_dir", str, "runs")
    paths.reject_unknown()

    phys = _Section("physics", raw.get("physics", {}))
    dt = phys.require("dt", float)
    nt = phys.require("nt", int)
    f_peak = phys.require("f_peak", float)
    if f_peak <= 0:
        raise ConfigurationError(f"physics.f_peak: must be positive, got {f_peak}")
    delay = phys.get("delay", float, round(1.2 / f_peak, 12))
    sim = SimConfig(
        dt=dt,
        nt=nt,
        pml_width=phys.get("pml_width", int, 20),
        cfl_factor=phys.get("cfl_factor", float, 0.5),
        free_surface=phys.get("free_surface", bool, True),
        pml_reflection=phys.get("pml_reflection", float, 1e-4),
        pml_reference_velocity=phys.get("pml_reference_velocity", float, None),
        backend=phys.get("backend", str, "auto"),
        blowup_check_interval=phys.get("blowup_check_interval", int, 50),
        tape=phys.get("tape", str, "full"),
        checkpoint_interval=phys.get("checkpoint_interval", int, 10),
    )
    phys.reject_unknown()

    acq = _Section("acquisition", raw.get("acquisition", {}))
    acquisition = {
        "n_sources": acq.get("n_sources", int, 1),
        "source_row": acq.get("source_row", int, 1),
        "receiver_row": acq.get("receiver_row", int, 1),
        "source_cells": acq.get("source_cells", list, None),
        "receiver_cells": acq.get("receiver_cells", list, None),
    }
    if acquisition["n_sources"] < 1:
        raise ConfigurationError("acquisition.n_sources: must be >= 1")
    acq.reject_unknown()

    net = _Section("network", raw.get("network", {}))
    network = NetworkConfig(
        depth=net.get("depth", int, 4),
        width=net.get("width", int, 128),
        omega=net.get("omega", float, 30.0),
    )
    seed = net.get("seed", int, 0)
    net.reject_unknown()

    training = None
    tr_raw = raw.get("training")
    if tr_raw is not None:
        tr = _Section("training", tr_raw)
        mode = tr.require("mode", str)
        if mode not in TRAINING_MODES:
            raise ConfigurationError(
                f"training.mode: expected one of {', '.join(TRAINING_MODES)}, got '{mode}'"
            )
        training = TrainingConfig(
            mode=mode,
            fwi_epochs=tr.get("fwi_epochs", int, 1000),
            fwi_lr=tr.get("fwi_lr", float, 1e-4),
            pretrain_epochs=tr.get("pretrain_epochs", int, 1000),
            pretrain_lr=tr.get("pretrain_lr", float, 5e-5),
            init_lr=tr.get("init_lr", float, None),
            std=tr.get("std", float, 1.0),
            mean=tr.get("mean", float, 3.0),
            seed=seed,
            eval_interval=tr.get("eval_interval", int, 1),
        )
        tr.reject_unknown()

    diag = _Section("diagnostics", raw.get("diagnostics", {}))
    spectrum_columns = diag.get("spectrum_columns", list, None)
    if spectrum_columns is not None:
        spectrum_columns = [int(c) for c in spectrum_columns]
    diag.reject_unknown()

    sweep_epochs = sweep_lrs = None
    sw_raw = raw.get("sweep")
    if sw_raw is not None:
        sw = _Section("sweep", sw_raw)
        sweep_epochs = [int(e) for e in sw.get("epochs", list, [])]
        sweep_lrs = [float(r) for r in sw.get("lrs", list, [])]
        sw.reject_unknown()

    resolved = {
        "paths": {
            "true_model": true_spec,
            "initial_model": init_spec,
            "observed_dir": observed_dir,
            "output_dir": output_dir,
        },
        "physics": {
            "dt": sim.dt, "nt": sim.nt, "f_peak": f_peak, "delay": delay,
            "pml_width": sim.pml_width, "cfl_factor": sim.cfl_factor,
            "free_surface": sim.free_surface, "pml_reflection": sim.pml_reflection,
            "pml_reference_velocity": sim.pml_reference_velocity,
            "backend": sim.backend, "blowup_check_interval": sim.blowup_check_interval,
            "tape": sim.tape, "checkpoint_interval": sim.checkpoint_interval,
        },
        "acquisition": acquisition,
        "network": {
            "depth": network.depth, "width": network.width,
            "omega": network.omega, "seed": seed,
        },
        "training": None if training is None else {
            "mode": training.mode,
            "fwi_epochs": training.fwi_epochs, "fwi_lr": training.fwi_lr,
            "pretrain_epochs": training.pretrain_epochs, "pretrain_lr": training.pretrain_lr,
            "init_lr": training.init_lr, "std": training.std, "mean": training.mean,
            "eval_interval": training.eval_interval,
        },
        "diagnostics": {"spectrum_columns": spectrum_columns},
        "sweep": None if sweep_epochs is None and sweep_lrs is None else {
            "epochs": sweep_epochs, "lrs": sweep_lrs,
        },
    }

    return RunConfig(
        base_dir=Path(base_dir),
        true_model_spec=true_spec,
        initial_model_spec=init_spec,
        observed_dir=observed_dir,
        output_dir=output_dir,
        sim=sim,
        f_peak=f_peak,
        delay=delay,
        acquisition=acquisition,
        network=network,
        training=training,
        spectrum_columns=spectrum_columns,
        sweep_epochs=sweep_epochs,
        sweep_lrs=sweep_lrs,
        resolved=resolved,
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(load_config(path), base_dir=path.parent)


def config_hash(cfg: RunConfig) -> str:
    """12-hex digest of the resolved config; names the run's output directory."""
    canon = json.dumps(cfg.resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
