"""Adam optimization and the training workflows.

Three routes to a final model, all driven by `run_pipeline`:

  pretrain     two stages — first fit the network so its denormalized output
               (global-mean denormalization) matches the initial model, then
               minimize the seismic data misfit with the same denormalization
  s-denorm     one stage — the initial model enters the denormalization as a
               frozen additive base, training starts exactly at that model
  a-denorm     like s-denorm, but the base model trains along with the network
               (its own Adam state)
  global-mean  one stage with the constant-mean base: no initial-model
               information at all (baseline)

`sweep_pretraining` grids the pretraining budget (epochs × learning rate) and
reports the final model error per cell.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .adjoint import misfit_gradient
from .diagnostics import MetricsBlock, compute_metrics
from .errors import ConfigurationError, DrfwiError, TrainingError
from .model import CoordinateGrid, VelocityModel, make_coordinate_grid
from .reparam import Reparameterization, denormalize_with_mask, full_parameter_gradient
from .siren import (
    SirenNetwork,
    flatten_grads,
    flatten_params,
    forward_with_cache,
    init_network,
    save_checkpoint,
    unflatten_params,
)
from .wavesim import (
    AcquisitionGeometry,
    ShotRecord,
    SimConfig,
    SourceWavelet,
    forward_all_shots,
)

__all__ = [
    "TRAINING_MODES",
    "AdamState",
    "NetworkConfig",
    "TrainingConfig",
    "StageCurves",
    "InversionReport",
    "SweepRow",
    "SweepResult",
    "adam_step",
    "pretrain",
    "run_fwi",
    "run_pipeline",
    "sweep_pretraining",
]

log = logging.getLogger(__name__)

TRAINING_MODES = ("pretrain", "s-denorm", "a-denorm", "global-mean")

# Which denormalization each training mode runs on.
_REPARAM_MODE = {
    "pretrain": "global-mean",
    "global-mean": "global-mean",
    "s-denorm": "static-init",
    "a-denorm": "adaptive-init",
}

ProgressFn = Callable[[str, int, int, float, float], None]


# -- Adam ---------------------------------------------------------------------


@dataclass(frozen=True)
class AdamState:
    """Moment accumulators for one parameter vector."""

    learning_rate: float
    m: np.ndarray  # first moment
    v: np.ndarray  # second moment
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning rate must be positive, got {self.learning_rate}")
        if self.step < 0:
            raise ConfigurationError(f"step must be >= 0, got {self.step}")
        if self.m.shape != self.v.shape:
            raise ConfigurationError("adam moment buffers must be shape-congruent")

    @classmethod
    def init(cls, n_params: int, learning_rate: float, **kwargs) -> "AdamState":
        if n_params < 1:
            raise ConfigurationError(f"need n_params >= 1, got {n_params}")
        return cls(
            learning_rate=learning_rate,
            m=np.zeros(n_params),
            v=np.zeros(n_params),
            **kwargs,
        )


def adam_step(
    state: AdamState, params: np.ndarray, grads: np.ndarray
) -> tuple[np.ndarray, AdamState]:
    """One Adam update with bias correction; returns (new params, new state)."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ConfigurationError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, "
            f"moments {state.m.shape}"
        )
    if not np.all(np.isfinite(grads)):
        raise TrainingError("non-finite gradient")
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return new_params, replace(state, m=m, v=v, step=t)


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture of the coordinate network."""

    depth: int = 4
    width: int = 128
    omega: float = 30.0

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ConfigurationError("network depth and width must be >= 1")
        if self.omega <= 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True)
class TrainingConfig:
    """Training mode plus the schedule and scaling knobs.

    `std` and `mean` are the scale S and constant base M of the denormalization
    (km/s). `init_lr` is the learning rate of the trainable base model in
    a-denorm mode; None means "same as fwi_lr". `eval_interval` controls how
    often the model error vs. ground truth is evaluated (in epochs).
    """

    mode: str
    fwi_epochs: int = 1000
    fwi_lr: float = 1e-4
    pretrain_epochs: int = 1000
    pretrain_lr: float = 5e-5
    init_lr: float | None = None
    std: float = 1.0
    mean: float = 3.0
    seed: int = 0
    eval_interval: int = 1

    def __post_init__(self):
        if self.mode not in TRAINING_MODES:
            raise ConfigurationError(
                f"unknown training mode '{self.mode}', expected one of {TRAINING_MODES}"
            )
        if self.fwi_epochs < 0 or self.pretrain_epochs < 0:
            raise ConfigurationError("epoch counts must be >= 0")
        for name in ("fwi_lr", "pretrain_lr"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.init_lr is not None and self.init_lr <= 0:
            raise ConfigurationError("init_lr must be positive when given")
        if self.eval_interval < 1:
            raise ConfigurationError("eval_interval must be >= 1")


# -- report types --------------------------------------------------------------


@dataclass(frozen=True)
class StageCurves:
    """Per-epoch curves of one training stage.

    `loss` is the stage objective; `model_mse` is MSE vs. ground truth (NaN on
    epochs where it was not evaluated, None when no truth was supplied);
    `epoch_seconds` is wall-clock per epoch.
    """

    name: str
    loss: np.ndarray
    model_mse: np.ndarray | None
    epoch_seconds: np.ndarray

    def __post_init__(self):
        for field in ("loss", "model_mse", "epoch_seconds"):
            arr = getattr(self, field)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)
        if self.model_mse is not None and self.model_mse.shape != self.loss.shape:
            raise ConfigurationError("curve lengths differ within one stage")
        if self.epoch_seconds.shape != self.loss.shape:
            raise ConfigurationError("curve lengths differ within one stage")


@dataclass(frozen=True)
class InversionReport:
    """Everything one training run produced.

    `checkpoints` holds the network at the stage boundaries: (INI, Stage1,
    Stage2) for the two-stage route, (INI, FWI) for single-stage routes.
    """

    mode: str
    stages: tuple[StageCurves, ...]
    checkpoints: tuple[tuple[str, SirenNetwork], ...]
    final_reparam: Reparameterization
    start_model: VelocityModel
    final_model: VelocityModel
    metrics: MetricsBlock | None = None
    init_metrics: MetricsBlock | None = None

    def stage(self, name: str) -> StageCurves:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(f"no stage named '{name}'")


# -- training loops -------------------------------------------------------------


def _model_mse(model: VelocityModel, truth: VelocityModel | None) -> float:
    if truth is None:
        return np.nan
    return float(np.mean((model.values - truth.values) ** 2))


def pretrain(
    net: SirenNetwork,
    grid: CoordinateGrid,
    r: Reparameterization,
    m_init: VelocityModel,
    cfg: TrainingConfig,
    progress: ProgressFn | None = None,
) -> tuple[SirenNetwork, np.ndarray]:
    """Fit the denormalized network output to the initial model.

    Minimizes 0.5 * ||m_init - D(f(theta))||_F^2 for cfg.pretrain_epochs
    full-grid steps and returns (trained network, per-epoch loss curve).
    Requires global-mean denormalization — the point of this stage is to bake
    the initial model into the network itself, not into the base term.
    """
    if r.mode != "global-mean":
        raise TrainingError(
            f"pretraining requires global-mean denormalization, got '{r.mode}'"
        )
    if m_init.shape != r.base.shape:
        raise ConfigurationError(
            f"m_init shape {m_init.shape} != denormalization base shape {r.base.shape}"
        )
    params = flatten_params(net)
    adam = AdamState.init(params.size, cfg.pretrain_lr)
    curve = np.empty(cfg.pretrain_epochs)
    target = m_init.values

    for epoch in range(cfg.pretrain_epochs):
        out, cache = forward_with_cache(net, grid)
        model, mask, _ = denormalize_with_mask(r, out)
        resid = model.values - target
        loss = 0.5 * float(np.dot(resid.ravel(), resid.ravel()))
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite pretraining loss at epoch {epoch}", epoch=epoch)
        wg, bg, _ = full_parameter_gradient(net, grid, r, resid, clip_mask=mask, cache=cache)
        try:
            params, adam = adam_step(adam, params, flatten_grads(wg, bg))
        except TrainingError as exc:
            raise TrainingError(f"pretraining epoch {epoch}: {exc}", epoch=epoch) from exc
        net = unflatten_params(net, params)
        curve[epoch] = loss
        if progress is not None and (epoch % cfg.eval_interval == 0 or epoch == cfg.pretrain_epochs - 1):
            progress("pretrain", epoch, cfg.pretrain_epochs, loss, np.nan)

    if cfg.pretrain_epochs:
        log.info("pretraining finished: final loss %.6e", curve[-1])
    return net, curve


def run_fwi(
    net: SirenNetwork,
    grid: CoordinateGrid,
    r: Reparameterization,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    observed: list[ShotRecord],
    sim_config: SimConfig,
    cfg: TrainingConfig,
    m_true: VelocityModel | None = None,
    progress: ProgressFn | None = None,
    stage_name: str = "fwi",
    checkpoint_labels: tuple[str, str] = ("INI", "FWI"),
) -> InversionReport:
    """Minimize the seismic data misfit over the network parameters.

    Each epoch: denormalize the network output, compute the misfit and its
    model-space gradient via the adjoint solve, chain it back through the
    denormalization and the network, and take one Adam step (two in a-denorm
    mode: the base model has its own optimizer state). Returns the full report
    with per-epoch curves and (initial, final) checkpoints.
    """
    epochs = cfg.fwi_epochs
    params = flatten_params(net)
    adam = AdamState.init(params.size, cfg.fwi_lr)
    adam_base = None
    if r.trainable_init:
        adam_base = AdamState.init(r.base.values.size, cfg.init_lr or cfg.fwi_lr)

    ini_net = net
    loss_curve = np.empty(epochs)
    mse_curve = np.full(epochs, np.nan) if m_true is not None else None
    secs = np.empty(epochs)
    workspace: dict = {}
    start_model = None

    for epoch in range(epochs):
        t0 = time.perf_counter()
        out, cache = forward_with_cache(net, grid)
        model, mask, n_clipped = denormalize_with_mask(r, out)
        if start_model is None:
            start_model = model
        try:
            loss, vgrad = misfit_gradient(
                model, geometry, wavelet, observed, sim_config, workspace=workspace
            )
        except DrfwiError as exc:
            raise TrainingError(f"epoch {epoch}: {exc}", epoch=epoch) from exc
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite data misfit at epoch {epoch}", epoch=epoch)
        wg, bg, ig = full_parameter_gradient(
            net, grid, r, vgrad.values, clip_mask=mask, cache=cache
        )
        try:
            params, adam = adam_step(adam, params, flatten_grads(wg, bg))
            if ig is not None:
                base_flat, adam_base = adam_step(adam_base, r.base.values.ravel(), ig.ravel())
                r = r.with_base(r.base.with_values(base_flat.reshape(r.base.shape)))
        except DrfwiError as exc:
            raise TrainingError(f"epoch {epoch}: {exc}", epoch=epoch) from exc
        net = unflatten_params(net, params)

        loss_curve[epoch] = loss
        if mse_curve is not None and (epoch % cfg.eval_interval == 0 or epoch == epochs - 1):
            mse_curve[epoch] = _model_mse(model, m_true)
        secs[epoch] = time.perf_counter() - t0
        if n_clipped:
            log.debug("epoch %d: velocity floor active on %d cells", epoch, n_clipped)
        if progress is not None and (epoch % cfg.eval_interval == 0 or epoch == epochs - 1):
            mse_now = mse_curve[epoch] if mse_curve is not None else np.nan
            progress(stage_name, epoch, epochs, loss, mse_now)

    final_out, _ = forward_with_cache(net, grid)
    final_model, _, _ = denormalize_with_mask(r, final_out)
    if start_model is None:  # zero-epoch run
        start_model = final_model

    stage = StageCurves(stage_name, loss_curve, mse_curve, secs)
    return InversionReport(
        mode=r.mode,
        stages=(stage,),
        checkpoints=((checkpoint_labels[0], ini_net), (checkpoint_labels[1], net)),
        final_reparam=r,
        start_model=start_model,
        final_model=final_model,
        metrics=compute_metrics(final_model, m_true) if m_true is not None else None,
    )


# -- pipeline -------------------------------------------------------------------


def _save_report_checkpoints(report: InversionReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, ckpt_net in report.checkpoints:
        save_checkpoint(ckpt_net, out_dir / f"checkpoint_{label.lower()}.bin")


def run_pipeline(
    true_model: VelocityModel | None,
    init_model: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    sim_config: SimConfig,
    network: NetworkConfig,
    training: TrainingConfig,
    observed: list[ShotRecord] | None = None,
    out_dir: str | Path | None = None,
    progress: ProgressFn | None = None,
) -> InversionReport:
    """Dispatch one full training run according to `training.mode`.

    pretrain: fit the network to the initial model under global-mean
    denormalization, then run FWI with the same denormalization; checkpoints
    INI / Stage1 / Stage2. s-denorm, a-denorm, global-mean: a single FWI stage;
    checkpoints INI / FWI. When `observed` is None it is simulated from
    `true_model` (which is then required). `out_dir`, when given, receives the
    stage-boundary checkpoints.
    """
    if observed is None:
        if true_model is None:
            raise ConfigurationError("need observed records or a true model to generate them")
        log.info("simulating observed data: %d shots", geometry.n_sources)
        observed = forward_all_shots(true_model, geometry, wavelet, sim_config)

    grid = make_coordinate_grid(init_model.nz, init_model.nx)
    net0 = init_network(
        depth=network.depth, width=network.width, omega=network.omega, seed=training.seed
    )

    rmode = _REPARAM_MODE[training.mode]
    if rmode == "global-mean":
        r = Reparameterization.global_mean(training.std, training.mean, like=init_model)
    elif rmode == "static-init":
        r = Reparameterization.static_init(training.std, init_model)
    else:
        r = Reparameterization.adaptive_init(training.std, init_model)

    if training.mode == "pretrain":
        t0 = time.perf_counter()
        net1, pre_curve = pretrain(net0, grid, r, init_model, training, progress=progress)
        pre_total = time.perf_counter() - t0
        pre_secs = np.full_like(pre_curve, pre_total / max(pre_curve.size, 1))
        fwi_report = run_fwi(
            net1, grid, r, geometry, wavelet, observed, sim_config, training,
            m_true=true_model, progress=progress,
            checkpoint_labels=("Stage1", "Stage2"),
        )
        pre_stage = StageCurves("pretrain", pre_curve, None, pre_secs)
        report = InversionReport(
            mode=training.mode,
            stages=(pre_stage,) + fwi_report.stages,
            checkpoints=(("INI", net0),) + fwi_report.checkpoints,
            final_reparam=fwi_report.final_reparam,
            start_model=fwi_report.start_model,
            final_model=fwi_report.final_model,
            metrics=fwi_report.metrics,
        )
    else:
        report = run_fwi(
            net0, grid, r, geometry, wavelet, observed, sim_config, training,
            m_true=true_model, progress=progress,
        )
        report = replace(report, mode=training.mode)

    if true_model is not None:
        report = replace(report, init_metrics=compute_metrics(init_model, true_model))
    if out_dir is not None:
        _save_report_checkpoints(report, Path(out_dir))
    return report


# -- pretraining sweep ------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    pretrain_epochs: int
    pretrain_lr: float
    final_mse: float  # NaN when the cell failed
    status: str  # "ok" or the failure reason


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best_index: int | None  # argmin of final_mse; ties: lowest epochs, then lowest lr

    @property
    def best(self) -> SweepRow | None:
        return None if self.best_index is None else self.rows[self.best_index]


def sweep_pretraining(
    true_model: VelocityModel,
    init_model: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    sim_config: SimConfig,
    network: NetworkConfig,
    training: TrainingConfig,
    epochs_list: Sequence[int],
    lr_list: Sequence[float],
    observed: list[ShotRecord] | None = None,
    progress: Callable[[int, int, SweepRow], None] | None = None,
) -> SweepResult:
    """Grid the pretraining budget and score each cell by final model MSE.

    Every cell runs the full two-stage pipeline from the same seed and the
    same observed data; failed cells are recorded with NaN and the sweep
    continues. Requires ground truth (it is the score).
    """
    if not epochs_list or not lr_list:
        raise ConfigurationError("sweep needs nonempty epochs and learning-rate lists")
    if observed is None:
        observed = forward_all_shots(true_model, geometry, wavelet, sim_config)

    rows: list[SweepRow] = []
    n_cells = len(epochs_list) * len(lr_list)
    for e in epochs_list:
        for lr in lr_list:
            cfg = replace(training, mode="pretrain", pretrain_epochs=int(e), pretrain_lr=float(lr))
            try:
                report = run_pipeline(
                    true_model, init_model, geometry, wavelet, sim_config,
                    network, cfg, observed=observed,
                )
                row = SweepRow(int(e), float(lr), report.metrics.mse, "ok")
            except DrfwiError as exc:
                log.warning("sweep cell (epochs=%s, lr=%s) failed: %s", e, lr, exc)
                row = SweepRow(int(e), float(lr), float("nan"), f"failed: {exc}")
            rows.append(row)
            if progress is not None:
                progress(len(rows), n_cells, row)

    ok = [i for i, row in enumerate(rows) if row.status == "ok"]
    best_index = (
        min(ok, key=lambda i: (rows[i].final_mse, rows[i].pretrain_epochs, rows[i].pretrain_lr))
        if ok
        else None
    )
    return SweepResult(rows=tuple(rows), best_index=best_index)
