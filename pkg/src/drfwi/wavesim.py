"""2D acoustic finite-difference simulation: leapfrog in time (order 2),
order-4 space, free surface on top, split-field PML elsewhere.

The scheme solves u_tt = c^2 (lap u + dphi/dx + dpsi/dz) with auxiliary
damping fields phi, psi that vanish in the interior (Grote/Sim style
second-order PML). Interior row 0 is the free surface: pressure pinned to
zero there, antisymmetric image ghosts above for the z-stencils. Velocities
are km/s at the API and converted to m/s internally; spacings are meters.

Everything the adjoint needs to be the exact transpose of this file lives in
the System class: the adjoint module reuses its coefficient fields verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, GeometryError, SimulationError
from .model import VelocityModel

__all__ = [
    "SourceWavelet",
    "AcquisitionGeometry",
    "ShotRecord",
    "SimConfig",
    "ricker",
    "surface_line_geometry",
    "simulate",
    "forward_all_shots",
    "data_misfit",
    "save_shot_record",
    "load_shot_record",
]

KM_PER_S = 1000.0  # m/s per km/s


@dataclass(frozen=True)
class SourceWavelet:
    """Time samples of the source signature."""

    samples: np.ndarray
    dt: float
    peak_frequency: float
    delay: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64).copy()
        if s.ndim != 1 or s.size < 1:
            raise ConfigurationError(f"wavelet samples must be 1D, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def nt(self) -> int:
        return self.samples.size


def ricker(peak_frequency: float, dt: float, nt: int, delay: float) -> SourceWavelet:
    """Ricker wavelet (1 - 2 a^2) exp(-a^2), a = pi f (t - delay); peak value 1 at t = delay."""
    if peak_frequency <= 0 or dt <= 0 or nt < 1 or delay < 0:
        raise ConfigurationError(
            f"bad ricker parameters: f={peak_frequency} dt={dt} nt={nt} delay={delay}"
        )
    t = np.arange(nt) * dt - delay
    a2 = (np.pi * peak_frequency * t) ** 2
    return SourceWavelet((1.0 - 2.0 * a2) * np.exp(-a2), dt, peak_frequency, delay)


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Source and receiver cells as (row, col) pairs on the interior grid."""

    sources: np.ndarray
    receivers: np.ndarray

    def __post_init__(self):
        for name in ("sources", "receivers"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
                raise GeometryError(f"{name} must be an (n, 2) array of cells, got {arr.shape}")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_sources(self) -> int:
        return self.sources.shape[0]

    @property
    def n_receivers(self) -> int:
        return self.receivers.shape[0]


def surface_line_geometry(
    nz: int, nx: int, n_sources: int, source_row: int = 1, receiver_row: int = 1
) -> AcquisitionGeometry:
    """n_sources evenly spaced along source_row, a receiver at every column.

    With the free surface pinning row 0 to zero, row 1 is the shallowest
    informative row; it is the default for both sources and receivers.
    """
    if n_sources < 1 or n_sources > nx:
        raise GeometryError(f"need 1 <= n_sources <= nx, got {n_sources} on nx={nx}")
    cols = np.unique(np.round(np.linspace(0, nx - 1, n_sources)).astype(np.int64))
    sources = np.column_stack([np.full(cols.size, source_row, dtype=np.int64), cols])
    receivers = np.column_stack(
        [np.full(nx, receiver_row, dtype=np.int64), np.arange(nx, dtype=np.int64)]
    )
    return AcquisitionGeometry(sources, receivers)


@dataclass(frozen=True)
class ShotRecord:
    """Traces (nt, n_receivers) for one source, sampled after every step."""

    traces: np.ndarray
    dt: float
    source_index: int
    source_cell: tuple[int, int]
    receivers: np.ndarray

    def __post_init__(self):
        tr = np.asarray(self.traces, dtype=np.float64).copy()
        tr.setflags(write=False)
        object.__setattr__(self, "traces", tr)
        rc = np.asarray(self.receivers, dtype=np.int64).copy()
        rc.setflags(write=False)
        object.__setattr__(self, "receivers", rc)

    @property
    def nt(self) -> int:
        return self.traces.shape[0]


@dataclass(frozen=True)
class SimConfig:
    """Time axis plus boundary/backend knobs for the simulator."""

    dt: float
    nt: int
    pml_width: int = 20
    cfl_factor: float = 0.5
    free_surface: bool = True
    pml_reflection: float = 1e-4
    pml_reference_velocity: float | None = None  # km/s; None = model max
    backend: str = "auto"  # auto | numba | numpy
    blowup_check_interval: int = 50
    tape: str = "full"  # full | checkpoint
    checkpoint_interval: int = 10

    def __post_init__(self):
        if self.dt <= 0 or self.nt < 1:
            raise ConfigurationError(f"need dt > 0 and nt >= 1, got dt={self.dt} nt={self.nt}")
        if self.pml_width < 0:
            raise ConfigurationError(f"pml_width must be >= 0, got {self.pml_width}")
        if not (0 < self.cfl_factor <= 1):
            raise ConfigurationError(f"cfl_factor must be in (0, 1], got {self.cfl_factor}")
        if self.backend not in ("auto", "numba", "numpy"):
            raise ConfigurationError(f"unknown backend '{self.backend}'")
        if self.tape not in ("full", "checkpoint"):
            raise ConfigurationError(f"unknown tape mode '{self.tape}'")
        if self.checkpoint_interval < 1:
            raise ConfigurationError("checkpoint_interval must be >= 1")


# 4th-order central stencil taps. D2: offsets (-2,-1,0,1,2); D1 uses the
# antisymmetric taps at (+1,+2) mirrored with opposite sign.
D2_OUTER = -1.0 / 12.0
D2_INNER = 4.0 / 3.0
D2_CENTER = -5.0 / 2.0
D1_INNER = 2.0 / 3.0
D1_OUTER = -1.0 / 12.0


class System:
    """Padded-grid coefficients, slices and cell maps for one model + config."""

    def __init__(self, m: VelocityModel, geometry: AcquisitionGeometry, config: SimConfig):
        self.m = m
        self.geometry = geometry
        self.config = config
        nz, nx = m.shape
        P = config.pml_width
        fs = config.free_surface
        self.fs = fs
        self.P = P

        c_int = m.values * KM_PER_S
        vmax = float(c_int.max())
        limit = config.cfl_factor * min(m.dz, m.dx) / vmax
        if config.dt > limit:
            raise ConfigurationError(
                f"cfl stability condition violated: dt={config.dt:g} s exceeds "
                f"cfl_factor*min(dz,dx)/vmax = {limit:g} s (vmax={vmax / KM_PER_S:g} km/s)"
            )

        pad_top = 2 if fs else 2 + P
        self.NZ = pad_top + nz + P + 2
        self.NX = 2 + P + nx + P + 2
        self.r0 = pad_top  # padded row of interior row 0
        self.c0 = 2 + P
        # Active block: every cell the scheme updates. The free-surface row
        # itself is pinned to zero and excluded.
        self.ar0 = self.r0 + 1 if fs else 2
        self.ar1 = self.NZ - 2
        self.ac0 = 2
        self.ac1 = self.NX - 2

        # Edge-replicated velocity pad; map_r/map_c record which interior cell
        # each padded cell borrows, for the exact gradient fold-back.
        self.map_r = np.clip(np.arange(self.NZ) - self.r0, 0, nz - 1)
        self.map_c = np.clip(np.arange(self.NX) - self.c0, 0, nx - 1)
        self.c_pad = c_int[np.ix_(self.map_r, self.map_c)]

        # Quadratic damping profiles sized for the target reflection coefficient.
        cref_kms = config.pml_reference_velocity
        cref = (cref_kms * KM_PER_S) if cref_kms is not None else vmax
        sx = np.zeros(self.NX)
        sz = np.zeros(self.NZ)
        if P > 0:
            ramp = (np.arange(1, P + 1) / P) ** 2
            smax_x = 3.0 * cref * np.log(1.0 / config.pml_reflection) / (2.0 * P * m.dx)
            smax_z = 3.0 * cref * np.log(1.0 / config.pml_reflection) / (2.0 * P * m.dz)
            sx[self.c0 - 1 : self.c0 - P - 1 : -1] = smax_x * ramp
            sx[self.c0 + nx : self.c0 + nx + P] = smax_x * ramp
            sz[self.r0 + nz : self.r0 + nz + P] = smax_z * ramp
            if not fs:
                sz[self.r0 - 1 : self.r0 - P - 1 : -1] = smax_z * ramp
        self.sx2d = np.broadcast_to(sx[None, :], (self.NZ, self.NX)).copy()
        self.sz2d = np.broadcast_to(sz[:, None], (self.NZ, self.NX)).copy()

        dt = config.dt
        ssum = self.sx2d + self.sz2d
        idden = 1.0 / (1.0 + 0.5 * dt * ssum)
        self.idden = idden
        self.c2dt2 = (self.c_pad * dt) ** 2
        self.a_coef = idden * (2.0 - dt * dt * self.sx2d * self.sz2d)
        self.b_coef = idden * (1.0 - 0.5 * dt * ssum)
        self.e_coef = idden * self.c2dt2
        self.fphi = 1.0 - dt * self.sx2d
        self.gphi = dt * (self.sz2d - self.sx2d)
        self.fpsi = 1.0 - dt * self.sz2d
        self.gpsi = dt * (self.sx2d - self.sz2d)

        # Stencil scales.
        dz, dx = m.dz, m.dx
        self.iz2 = D2_OUTER / dz**2
        self.iz1 = D2_INNER / dz**2
        self.ix2 = D2_OUTER / dx**2
        self.ix1 = D2_INNER / dx**2
        self.icc = D2_CENTER * (1.0 / dz**2 + 1.0 / dx**2)
        self.ez1 = D1_INNER / dz
        self.ez2 = D1_OUTER / dz
        self.ex1 = D1_INNER / dx
        self.ex2 = D1_OUTER / dx

        self._check_cells(geometry.sources, "source")
        self._check_cells(geometry.receivers, "receiver")
        if np.unique(geometry.receivers, axis=0).shape[0] != geometry.n_receivers:
            raise GeometryError("receiver cells must be unique")
        self.src_rows = geometry.sources[:, 0] + self.r0
        self.src_cols = geometry.sources[:, 1] + self.c0
        self.rcv_rows = geometry.receivers[:, 0] + self.r0
        self.rcv_cols = geometry.receivers[:, 1] + self.c0
        self.src_amp = self.c2dt2[self.src_rows, self.src_cols] / (m.dz * m.dx)

    def _check_cells(self, cells: np.ndarray, kind: str):
        nz, nx = self.m.shape
        rmin = 1 if self.fs else 0
        bad_r = (cells[:, 0] < rmin) | (cells[:, 0] > nz - 1)
        bad_c = (cells[:, 1] < 0) | (cells[:, 1] > nx - 1)
        if np.any(bad_r) or np.any(bad_c):
            raise GeometryError(
                f"{kind} cells must lie in rows {rmin}..{nz - 1} and cols 0..{nx - 1} "
                f"(row 0 is the pinned free-surface row); got "
                f"{cells[bad_r | bad_c].tolist()}"
            )

    @property
    def act_shape(self) -> tuple[int, int]:
        return (self.ar1 - self.ar0, self.ac1 - self.ac0)

    def new_state(self, batch: int):
        shape = (batch, self.NZ, self.NX)
        return (np.zeros(shape), np.zeros(shape), np.zeros(shape), np.zeros(shape))

    # -- numpy reference stepping ------------------------------------------

    def _act(self, o_r: int, o_c: int):
        return (slice(None), slice(self.ar0 + o_r, self.ar1 + o_r), slice(self.ac0 + o_c, self.ac1 + o_c))

    def lap_act(self, u: np.ndarray) -> np.ndarray:
        g = self.icc * u[self._act(0, 0)]
        g += self.iz1 * (u[self._act(-1, 0)] + u[self._act(1, 0)])
        g += self.iz2 * (u[self._act(-2, 0)] + u[self._act(2, 0)])
        g += self.ix1 * (u[self._act(0, -1)] + u[self._act(0, 1)])
        g += self.ix2 * (u[self._act(0, -2)] + u[self._act(0, 2)])
        return g

    def d1z_act(self, u: np.ndarray) -> np.ndarray:
        return self.ez1 * (u[self._act(1, 0)] - u[self._act(-1, 0)]) + self.ez2 * (
            u[self._act(2, 0)] - u[self._act(-2, 0)]
        )

    def d1x_act(self, u: np.ndarray) -> np.ndarray:
        return self.ex1 * (u[self._act(0, 1)] - u[self._act(0, -1)]) + self.ex2 * (
            u[self._act(0, 2)] - u[self._act(0, -2)]
        )

    def apply_ghosts(self, u: np.ndarray):
        # Antisymmetric image of interior row 1 about the pinned surface row.
        # Only the first ghost row is ever read by the +-2 stencils.
        if self.fs:
            u[:, self.r0 - 1, :] = -u[:, self.r0 + 1, :]

    def step_numpy(self, up, uc, phi, psi, wk: float):
        """One reference leapfrog step for all shots. Returns (un, phin, psin, v2t)."""
        A = self._act(0, 0)
        self.apply_ghosts(uc)
        v2t = self.lap_act(uc) + self.d1x_act(phi) + self.d1z_act(psi)
        un = np.zeros_like(uc)
        un[A] = self.a_coef[A[1:]] * uc[A] - self.b_coef[A[1:]] * up[A] + self.e_coef[A[1:]] * v2t
        un[np.arange(un.shape[0]), self.src_rows, self.src_cols] += self.src_amp * wk
        phin = np.zeros_like(phi)
        psin = np.zeros_like(psi)
        phin[A] = self.fphi[A[1:]] * phi[A] + self.gphi[A[1:]] * self.d1x_act(uc)
        psin[A] = self.fpsi[A[1:]] * psi[A] + self.gpsi[A[1:]] * self.d1z_act(uc)
        return un, phin, psin, v2t

    # -- shared driver ------------------------------------------------------

    def run_forward(
        self,
        wavelet: SourceWavelet,
        want_tape: bool = False,
        want_checkpoints: bool = False,
        state=None,
        steps: range | None = None,
        tape_out: np.ndarray | None = None,
        snapshots: dict | None = None,
    ):
        """Time-step all shots at once.

        Returns (traces, tape, checkpoints, final_state): traces has shape
        (n_shots, nt, n_receivers); tape stacks the c^2-factor field per step
        on the active block when requested; checkpoints maps step index ->
        copied state. `state`/`steps`/`tape_out` support segment recomputation
        for the checkpointed adjoint. `snapshots` maps step index -> slot
        filled with the interior wavefield after that step.
        """
        cfg = self.config
        if abs(wavelet.dt - cfg.dt) > 1e-15:
            raise ConfigurationError(f"wavelet dt {wavelet.dt} != config dt {cfg.dt}")
        if wavelet.nt < cfg.nt:
            raise ConfigurationError(f"wavelet has {wavelet.nt} samples, config needs {cfg.nt}")
        B = self.geometry.n_sources
        steps = steps if steps is not None else range(cfg.nt)
        up, uc, phi, psi = state if state is not None else self.new_state(B)
        n_steps = len(steps)
        traces = np.zeros((B, cfg.nt, self.geometry.n_receivers)) if state is None else None
        nar, nac = self.act_shape
        tape = tape_out
        if want_tape and tape is None:
            tape = np.empty((n_steps, B, nar, nac))
        checkpoints = {} if want_checkpoints else None

        use_numba = cfg.backend in ("numba", "auto")
        if use_numba:
            from . import kernels

            # Spare buffers the kernel writes into; rotated each step so the
            # whole sweep reuses six field arrays. Kernels only ever write the
            # active block (plus the ghost row), so cells outside it keep the
            # zeros they were allocated with.
            spare_u = np.zeros_like(up)
            spare_phi = np.zeros_like(phi)
            spare_psi = np.zeros_like(psi)
            scratch = None if tape is not None else np.empty((B, nar, nac))

        shot_ix = np.arange(B)
        w = wavelet.samples
        for pos, k in enumerate(steps):
            if checkpoints is not None and k % cfg.checkpoint_interval == 0:
                checkpoints[k] = (up.copy(), uc.copy(), phi.copy(), psi.copy())
            if use_numba:
                un, phin, psin = spare_u, spare_phi, spare_psi
                v2t_slot = tape[pos] if tape is not None else scratch
                kernels.forward_step(
                    up, uc, phi, psi, un, phin, psin, v2t_slot,
                    self.a_coef, self.b_coef, self.e_coef,
                    self.fphi, self.gphi, self.fpsi, self.gpsi,
                    self.iz2, self.iz1, self.ix2, self.ix1, self.icc,
                    self.ez1, self.ez2, self.ex1, self.ex2,
                    self.ar0, self.ar1, self.ac0, self.ac1, self.r0, self.fs,
                )
                un[shot_ix, self.src_rows, self.src_cols] += self.src_amp * w[k]
                spare_u, spare_phi, spare_psi = up, phi, psi
                up, uc, phi, psi = uc, un, phin, psin
            else:
                un, phin, psin, v2t = self.step_numpy(up, uc, phi, psi, w[k])
                if tape is not None:
                    tape[pos] = v2t
                up, uc, phi, psi = uc, un, phin, psin
            if traces is not None:
                traces[:, k, :] = uc[:, self.rcv_rows, self.rcv_cols]
            if snapshots is not None and k in snapshots:
                snapshots[k] = uc[:, self.r0 : self.r0 + self.m.nz, self.c0 : self.c0 + self.m.nx].copy()
            if (pos + 1) % cfg.blowup_check_interval == 0 or pos == n_steps - 1:
                if not np.all(np.isfinite(uc)):
                    raise SimulationError(
                        f"wavefield blew up (non-finite values) at step {k}", step=k
                    )
        return traces, tape, checkpoints, (up, uc, phi, psi)


def _single_source_system(system: System, source_index: int) -> System:
    geom = system.geometry
    if not (0 <= source_index < geom.n_sources):
        raise GeometryError(f"source_index {source_index} out of range 0..{geom.n_sources - 1}")
    one = AcquisitionGeometry(geom.sources[source_index : source_index + 1], geom.receivers)
    return System(system.m, one, system.config)


def simulate(
    m: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    config: SimConfig,
    source_index: int = 0,
) -> ShotRecord:
    """Forward-model one shot."""
    sys_all = System(m, geometry, config)
    sys1 = _single_source_system(sys_all, source_index)
    traces, _, _, _ = sys1.run_forward(wavelet)
    return ShotRecord(
        traces[0],
        config.dt,
        source_index,
        tuple(int(v) for v in geometry.sources[source_index]),
        geometry.receivers,
    )


def forward_all_shots(
    m: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: SourceWavelet,
    config: SimConfig,
) -> list[ShotRecord]:
    """Forward-model every source; records ordered by source index."""
    system = System(m, geometry, config)
    traces, _, _, _ = system.run_forward(wavelet)
    return [
        ShotRecord(
            traces[i],
            config.dt,
            i,
            tuple(int(v) for v in geometry.sources[i]),
            geometry.receivers,
        )
        for i in range(geometry.n_sources)
    ]


def data_misfit(synthetic: list[ShotRecord], observed: list[ShotRecord]) -> float:
    """0.5 * sum of squared trace differences over all shots."""
    if len(synthetic) != len(observed):
        raise ConfigurationError(
            f"got {len(synthetic)} synthetic records vs {len(observed)} observed"
        )
    total = 0.0
    for s, o in zip(synthetic, observed):
        if s.traces.shape != o.traces.shape:
            raise ConfigurationError(
                f"record shapes differ: {s.traces.shape} vs {o.traces.shape}"
            )
        d = s.traces - o.traces
        total += 0.5 * float(np.dot(d.ravel(), d.ravel()))
    return total


def save_shot_record(record: ShotRecord, path: str | Path) -> Path:
    """Raw float32 little-endian (nt, n_receivers) traces plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record.traces.astype("<f4").tofile(path)
    meta = {
        "nt": record.nt,
        "dt": record.dt,
        "n_receivers": int(record.traces.shape[1]),
        "receivers": record.receivers.tolist(),
        "source_index": record.source_index,
        "source_cell": list(record.source_cell),
        "dtype": "float32le",
    }
    path.with_name(path.name + ".json").write_text(json.dumps(meta) + "\n")
    return path


def load_shot_record(path: str | Path) -> ShotRecord:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    raw = np.fromfile(path, dtype="<f4")
    nt, nr = meta["nt"], meta["n_receivers"]
    if raw.size != nt * nr:
        raise ConfigurationError(f"{path} holds {raw.size} samples, sidecar says {nt}x{nr}")
    return ShotRecord(
        raw.reshape(nt, nr).astype(np.float64),
        float(meta["dt"]),
        int(meta["source_index"]),
        tuple(meta["source_cell"]),
        np.asarray(meta["receivers"], dtype=np.int64),
    )
