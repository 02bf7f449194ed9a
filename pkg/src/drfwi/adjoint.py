"""Discrete adjoint of the finite-difference scheme: misfit gradients w.r.t.
the velocity model.

The gradient is the exact transpose of the implemented discretization
(including the edge-replicated velocity padding, the PML auxiliary fields and
the free-surface image ghosts), so dot-product and finite-difference checks
hold to floating-point accuracy. Wavefield history is either taped in full or
reconstructed segment-by-segment from periodic state checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import VelocityModel
from .wavesim import AcquisitionGeometry, ShotRecord, SimConfig, SourceWavelet, System

__all__ = [
    "VelocityGradient",
    "misfit_gradient",
    "adjoint_apply",
    "linearized_forward",
]

KM_PER_S = 1000.0


@dataclass(frozen=True)
class VelocityGradient:
    """dL/dm on the interior grid, units misfit per (km/s)."""

    values: np.ndarray
    dz: float
    dx: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# -- numpy reference transpose ops -----------------------------------------


def _scatter_d2(S: System, y: np.ndarray) -> np.ndarray:
    """Transpose of lap_act: scatter the active block through the stencil."""
    out = np.zeros_like(y)
    ya = y[:, S.ar0 : S.ar1, S.ac0 : S.ac1]
    for oz, c in ((0, S.icc), (-1, S.iz1), (1, S.iz1), (-2, S.iz2), (2, S.iz2)):
        out[:, S.ar0 + oz : S.ar1 + oz, S.ac0 : S.ac1] += c * ya
    for ox, c in ((-1, S.ix1), (1, S.ix1), (-2, S.ix2), (2, S.ix2)):
        out[:, S.ar0 : S.ar1, S.ac0 + ox : S.ac1 + ox] += c * ya
    return out


def _scatter_d1z(S: System, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    ya = y[:, S.ar0 : S.ar1, S.ac0 : S.ac1]
    for oz, c in ((1, S.ez1), (-1, -S.ez1), (2, S.ez2), (-2, -S.ez2)):
        out[:, S.ar0 + oz : S.ar1 + oz, S.ac0 : S.ac1] += c * ya
    return out


def _scatter_d1x(S: System, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    ya = y[:, S.ar0 : S.ar1, S.ac0 : S.ac1]
    for ox, c in ((1, S.ex1), (-1, -S.ex1), (2, S.ex2), (-2, -S.ex2)):
        out[:, S.ar0 : S.ar1, S.ac0 + ox : S.ac1 + ox] += c * ya
    return out


def _adjoint_step_numpy(S: System, wup, wuc, wphi, wpsi, v2t_k, gacc):
    A = (slice(None), slice(S.ar0, S.ar1), slice(S.ac0, S.ac1))
    Ai = A[1:]
    gacc[A] += wuc[A] * S.idden[Ai] * v2t_k
    h = np.zeros_like(wuc)
    p = np.zeros_like(wuc)
    q = np.zeros_like(wuc)
    h[A] = S.e_coef[Ai] * wuc[A]
    p[A] = S.gphi[Ai] * wphi[A]
    q[A] = S.gpsi[Ai] * wpsi[A]

    hh = _scatter_d2(S, h) + _scatter_d1x(S, p) + _scatter_d1z(S, q)
    if S.fs:
        # Fold the image-ghost row back onto the first interior row.
        hh[:, S.r0 + 1, :] -= hh[:, S.r0 - 1, :]

    nwuc = np.zeros_like(wuc)
    nwup = np.zeros_like(wuc)
    nwphi = np.zeros_like(wuc)
    nwpsi = np.zeros_like(wuc)
    nwuc[A] = S.a_coef[Ai] * wuc[A] + wup[A] + hh[A]
    nwup[A] = -S.b_coef[Ai] * wuc[A]
    nwphi[A] = S.fphi[Ai] * wphi[A] + _scatter_d1x(S, h)[A]
    nwpsi[A] = S.fpsi[Ai] * wpsi[A] + _scatter_d1z(S, h)[A]
    return nwup, nwuc, nwphi, nwpsi


# -- reverse sweep -----------------------------------------------------------


def _reverse_sweep(S: System, wavelet: SourceWavelet, residual: np.ndarray, tape_segments):
    """Run the adjoint recursion backward through time.

    tape_segments yields (k0, tape) pairs from the last segment to the first,
    where tape[k - k0] is the taped c^2-factor field of forward step k.
    Returns dL/d(c^2 dt^2) per shot, shape (B, NZ, NX).
    """
    cfg = S.config
    B = S.geometry.n_sources
    use_numba = cfg.backend in ("numba", "auto")
    if use_numba:
        from . import kernels

    wup, wuc, wphi, wpsi = S.new_state(B)
    spare = S.new_state(B)
    h = np.zeros_like(wuc)
    p = np.zeros_like(wuc)
    q = np.zeros_like(wuc)
    gacc = np.zeros_like(wuc)
    shot_ix = np.arange(B)
    w = wavelet.samples
    inv_cell = 1.0 / (S.m.dz * S.m.dx)

    for k0, tape in tape_segments:
        for pos in range(tape.shape[0] - 1, -1, -1):
            k = k0 + pos
            # Dual of trace sampling, then of the source's velocity scaling.
            wuc[shot_ix[:, None], S.rcv_rows[None, :], S.rcv_cols[None, :]] += residual[:, k, :]
            gacc[shot_ix, S.src_rows, S.src_cols] += (
                wuc[shot_ix, S.src_rows, S.src_cols] * w[k] * inv_cell
            )
            if use_numba:
                nwup, nwuc, nwphi, nwpsi = spare
                kernels.adjoint_step(
                    wup, wuc, wphi, wpsi, nwup, nwuc, nwphi, nwpsi,
                    h, p, q, tape[pos], gacc,
                    S.idden, S.a_coef, S.b_coef, S.e_coef,
                    S.fphi, S.gphi, S.fpsi, S.gpsi,
                    S.iz2, S.iz1, S.ix2, S.ix1, S.icc,
                    S.ez1, S.ez2, S.ex1, S.ex2,
                    S.ar0, S.ar1, S.ac0, S.ac1, S.r0, S.fs,
                )
                spare = (wup, wuc, wphi, wpsi)
                wup, wuc, wphi, wpsi = nwup, nwuc, nwphi, nwpsi
            else:
                wup, wuc, wphi, wpsi = _adjoint_step_numpy(S, wup, wuc, wphi, wpsi, tape[pos], gacc)
    return gacc


def _assemble_gradient(S: System, gacc: np.ndarray) -> VelocityGradient:
    """Chain dL/d(c^2 dt^2) through the velocity scaling and the edge pad."""
    g = gacc.sum(axis=0)
    g_cpad = g * (2.0 * S.config.dt**2) * S.c_pad
    g_int = np.zeros(S.m.shape)
    np.add.at(g_int, (S.map_r[:, None], S.map_c[None, :]), g_cpad)
    g_int *= KM_PER_S
    if S.fs:
        g_int[0, :] = 0.0
    return VelocityGradient(g_int, S.m.dz, S.m.dx)


def _stack_observed(S: System, observed: list[ShotRecord]) -> np.ndarray:
    B = S.geometry.n_sources
    cfg = S.config
    if len(observed) != B:
        raise ConfigurationError(f"got {len(observed)} observed records for {B} sources")
    obs = np.empty((B, cfg.nt, S.geometry.n_receivers))
    for i, rec in enumerate(observed):
        if rec.traces.shape != (cfg.nt, S.geometry.n_receivers):
            raise ConfigurationError(
                f"observed record {i} has shape {rec.traces.shape}, expected "
                f"({cfg.nt}, {S.geometry.n_receivers})"
            )
        if abs(rec.dt - cfg.dt) > 1e-15:
            raise ConfigurationError(f"observed record {i} dt {rec.dt} != config dt {cfg.dt}")
        obs[i] = rec.traces
    return obs


def _workspace_tape(workspace: dict | None, shape: tuple) -> np.ndarray | None:
    """Reusable tape buffer: avoids reallocating hundreds of MB per epoch."""
    if workspace is None:
        return None
    tape = workspace.get("tape")
    if tape is None or tape.shape[1:] != shape[1:] or tape.shape[0] < shape[0]:
        tape = np.empty(shape)
        workspace["tape"] = tape
    return tape[: shape[0]]


def _gradient_from_residual(
    S: System, wavelet: SourceWavelet, residual: np.ndarray, workspace: dict | None = None
):
    cfg = S.config
    B = S.geometry.n_sources
    nar, nac = S.act_shape
    if cfg.tape == "full":
        buf = _workspace_tape(workspace, (cfg.nt, B, nar, nac))
        _, tape, _, _ = S.run_forward(wavelet, want_tape=True, tape_out=buf)
        gacc = _reverse_sweep(S, wavelet, residual, [(0, tape)])
    else:
        _, _, cps, _ = S.run_forward(wavelet, want_checkpoints=True)
        starts = sorted(cps.keys(), reverse=True)
        seg_max = min(cfg.checkpoint_interval, cfg.nt)

        def segments():
            k1 = cfg.nt
            for k0 in starts:
                buf = _workspace_tape(workspace, (seg_max, B, nar, nac))
                buf = buf[: k1 - k0] if buf is not None else None
                _, seg_tape, _, _ = S.run_forward(
                    wavelet, want_tape=True, state=cps.pop(k0), steps=range(k0, k1), tape_out=buf
                )
                yield k0, seg_tape
                k1 = k0

        gacc = _reverse_sweep(S, wavelet, residual, segments())
    return _assemble_gradient(S, gacc)


def misfit_gradient(
    m: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    observed: list[ShotRecord],
    config: SimConfig,
    workspace: dict | None = None,
) -> tuple[float, VelocityGradient]:
    """L = 0.5 sum |d_syn - d_obs|^2 over all shots, and its exact dL/dm.

    The returned gradient lives on the interior grid in misfit per (km/s);
    the free-surface row is zero. Pass the same `workspace` dict across
    repeated calls (one training loop) to reuse the wavefield tape buffer.
    """
    S = System(m, geometry, config)
    obs = _stack_observed(S, observed)
    traces, _, _, _ = S.run_forward(wavelet)
    residual = traces - obs
    loss = 0.5 * float(np.dot(residual.ravel(), residual.ravel()))
    grad = _gradient_from_residual(S, wavelet, residual, workspace)
    return loss, grad


def adjoint_apply(
    m: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    data_perturbation: np.ndarray,
    config: SimConfig,
) -> VelocityGradient:
    """J^T applied to a data-space perturbation (n_shots, nt, n_receivers)."""
    S = System(m, geometry, config)
    dp = np.asarray(data_perturbation, dtype=np.float64)
    expected = (geometry.n_sources, config.nt, geometry.n_receivers)
    if dp.shape != expected:
        raise ConfigurationError(f"data perturbation shape {dp.shape} != {expected}")
    return _gradient_from_residual(S, wavelet, dp)


def linearized_forward(
    m: VelocityModel,
    model_perturbation: np.ndarray,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    config: SimConfig,
) -> np.ndarray:
    """J applied to a model perturbation: the Born/tangent-linear traces.

    Returns (n_shots, nt, n_receivers). Reference numpy implementation used by
    the dot-product tests; perturbations follow the same edge-replicated
    padding as the forward map.
    """
    S = System(m, geometry, config)
    dm = np.asarray(model_perturbation, dtype=np.float64)
    if dm.shape != m.shape:
        raise ConfigurationError(f"model perturbation shape {dm.shape} != {m.shape}")
    _, tape, _, _ = S.run_forward(wavelet, want_tape=True)

    dc_pad = KM_PER_S * dm[np.ix_(S.map_r, S.map_c)]
    dc2dt2 = 2.0 * S.config.dt**2 * S.c_pad * dc_pad
    B = S.geometry.n_sources
    A = (slice(None), slice(S.ar0, S.ar1), slice(S.ac0, S.ac1))
    Ai = A[1:]
    dsrc_amp = dc2dt2[S.src_rows, S.src_cols] / (S.m.dz * S.m.dx)

    dup, duc, dphi, dpsi = S.new_state(B)
    dtraces = np.zeros((B, config.nt, geometry.n_receivers))
    shot_ix = np.arange(B)
    w = wavelet.samples
    for k in range(config.nt):
        S.apply_ghosts(duc)
        dv2t = S.lap_act(duc) + S.d1x_act(dphi) + S.d1z_act(dpsi)
        dun = np.zeros_like(duc)
        dun[A] = (
            S.a_coef[Ai] * duc[A]
            - S.b_coef[Ai] * dup[A]
            + S.e_coef[Ai] * dv2t
            + S.idden[Ai] * dc2dt2[Ai] * tape[k]
        )
        dun[shot_ix, S.src_rows, S.src_cols] += dsrc_amp * w[k]
        dphin = np.zeros_like(dphi)
        dpsin = np.zeros_like(dpsi)
        dphin[A] = S.fphi[Ai] * dphi[A] + S.gphi[Ai] * S.d1x_act(duc)
        dpsin[A] = S.fpsi[Ai] * dpsi[A] + S.gpsi[Ai] * S.d1z_act(duc)
        dup, duc, dphi, dpsi = duc, dun, dphin, dpsin
        dtraces[:, k, :] = duc[:, S.rcv_rows, S.rcv_cols]
    return dtraces
