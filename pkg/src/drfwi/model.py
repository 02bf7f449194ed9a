"""Velocity models on regular 2D grids and the coordinate grids fed to networks.

Conventions used throughout the package: model arrays have shape (nz, nx) with
row 0 at the surface, velocities are in km/s, grid spacings dz/dx in meters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ModelError

__all__ = [
    "VelocityModel",
    "GridField",
    "CoordinateGrid",
    "load_model",
    "save_model",
    "gaussian_smooth",
    "linear_model",
    "constant_model",
    "downsample",
    "make_coordinate_grid",
    "synthetic_marmousi",
]


def _validate_values(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise ModelError(f"model values must be a 2D array, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ModelError("model values must be finite")
    if np.any(values <= 0.0):
        raise ModelError("model velocities must be positive (km/s)")
    values = values.copy()
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class VelocityModel:
    """Gridded velocity field (km/s). Immutable; values array is read-only."""

    values: np.ndarray
    dz: float
    dx: float

    def __post_init__(self):
        if self.dz <= 0 or self.dx <= 0:
            raise ModelError(f"grid spacings must be positive, got dz={self.dz} dx={self.dx}")
        object.__setattr__(self, "values", _validate_values(self.values))

    @property
    def nz(self) -> int:
        return self.values.shape[0]

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_values(self, values: np.ndarray) -> "VelocityModel":
        """New model on the same grid with different values."""
        return VelocityModel(values, self.dz, self.dx)


@dataclass(frozen=True)
class GridField:
    """A signed scalar field on a model grid (e.g. a velocity perturbation).

    Same shape/spacing conventions as VelocityModel but without the positivity
    requirement, so it can hold differences of models.
    """

    values: np.ndarray
    dz: float
    dx: float

    def __post_init__(self):
        if self.dz <= 0 or self.dx <= 0:
            raise ModelError(f"grid spacings must be positive, got dz={self.dz} dx={self.dx}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ModelError(f"field values must be a 2D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ModelError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def nz(self) -> int:
        return self.values.shape[0]

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class CoordinateGrid:
    """Normalized (z, x) input coordinates for a network, one row per grid cell."""

    points: np.ndarray
    nz: int
    nx: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (self.nz * self.nx, 2):
            raise ModelError(f"coordinate grid shape {pts.shape} != ({self.nz * self.nx}, 2)")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def _axis_coords(n: int) -> np.ndarray:
    # A single row/column has no span to normalize; it maps to the midpoint 0.
    if n == 1:
        return np.zeros(1)
    return np.linspace(-1.0, 1.0, n)


def make_coordinate_grid(nz: int, nx: int) -> CoordinateGrid:
    """Row-major grid of (z, x) pairs, each axis normalized to [-1, 1]."""
    if nz < 1 or nx < 1:
        raise ModelError(f"grid must be at least 1x1, got {nz}x{nx}")
    zc = _axis_coords(nz)
    xc = _axis_coords(nx)
    zz, xx = np.meshgrid(zc, xc, indexing="ij")
    pts = np.column_stack([zz.ravel(), xx.ravel()])
    return CoordinateGrid(pts, nz, nx)


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def save_model(m: VelocityModel, path: str | Path) -> Path:
    """Write raw float32 little-endian row-major values plus a JSON sidecar.

    The sidecar (<path>.json) records nz, nx, dz, dx so load_model needs no flags.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m.values.astype("<f4").tofile(path)
    meta = {"nz": m.nz, "nx": m.nx, "dz": m.dz, "dx": m.dx, "dtype": "float32le"}
    _sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n")
    return path


def load_model(
    path: str | Path,
    nz: int | None = None,
    nx: int | None = None,
    dz: float | None = None,
    dx: float | None = None,
) -> VelocityModel:
    """Read a raw float32 little-endian row-major model.

    Grid parameters come from the JSON sidecar written by save_model when present;
    explicit arguments override the sidecar. The file length must match nz*nx.
    """
    path = Path(path)
    sidecar = _sidecar_path(path)
    meta: dict = {}
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
    nz = nz if nz is not None else meta.get("nz")
    nx = nx if nx is not None else meta.get("nx")
    dz = dz if dz is not None else meta.get("dz")
    dx = dx if dx is not None else meta.get("dx")
    if nz is None or nx is None or dz is None or dx is None:
        raise ModelError(f"grid parameters for {path} missing: pass nz/nx/dz/dx or provide the sidecar")
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != nz * nx:
        raise ModelError(f"{path} holds {raw.size} floats, expected nz*nx = {nz * nx}")
    return VelocityModel(raw.reshape(nz, nx), float(dz), float(dx))


def gaussian_smooth(m: VelocityModel, sigma: float) -> VelocityModel:
    """Gaussian blur with stddev sigma (in cells), edges replicated."""
    if sigma < 0:
        raise ModelError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return m
    return m.with_values(gaussian_filter(m.values, sigma=sigma, mode="nearest"))


def linear_model(
    nz: int, nx: int, dz: float, dx: float, v_top: float, v_bottom: float
) -> VelocityModel:
    """Velocity linear in depth, constant along each row."""
    profile = np.linspace(v_top, v_bottom, nz)
    return VelocityModel(np.tile(profile[:, None], (1, nx)), dz, dx)


def constant_model(nz: int, nx: int, dz: float, dx: float, v: float) -> VelocityModel:
    return VelocityModel(np.full((nz, nx), float(v)), dz, dx)


def downsample(m: VelocityModel, fz: int, fx: int) -> VelocityModel:
    """Strided subsampling by integer factors; spacings scale by the factors."""
    if fz < 1 or fx < 1 or int(fz) != fz or int(fx) != fx:
        raise ModelError(f"downsample factors must be positive integers, got ({fz}, {fx})")
    return VelocityModel(m.values[::fz, ::fx], m.dz * fz, m.dx * fx)


def synthetic_marmousi(
    nz: int = 94, nx: int = 288, dz: float = 15.0, dx: float = 15.0
) -> VelocityModel:
    """Deterministic Marmousi-style structural model.

    Dipping folded layers cut by two growth faults, a shallow low-velocity lens
    and a deep high-velocity wedge. Velocities run 1.5 to 4.7 km/s, increasing
    with depth but with two inversions, so the field is blocky and realistic
    enough to exercise inversion, spectra and smoothing the way a field model
    would. Purely functional: same arguments, same model.
    """
    zzi, xxi = np.meshgrid(np.arange(nz), np.arange(nx), indexing="ij")
    zn = zzi / max(nz - 1, 1)
    xn = xxi / max(nx - 1, 1)

    # Structural coordinate: depth + fold (growing with depth) + regional dip.
    s = (
        zn
        + 0.11 * np.sin(2.0 * np.pi * (1.3 * xn + 0.15)) * (0.25 + 0.75 * zn)
        + 0.05 * np.sin(2.0 * np.pi * (3.1 * xn + 0.4)) * zn
        + 0.09 * (xn - 0.5)
    )
    # Two normal faults with throw increasing downward.
    for xf, throw in ((0.36, 0.085), (0.63, -0.065)):
        s = s + np.where(xn > xf, throw * (0.3 + 0.7 * zn), 0.0)

    n_layers = 18
    layer = np.clip(np.floor(s * n_layers), 0, n_layers - 1).astype(int)
    k = np.arange(n_layers)
    v_table = 1.5 + 3.1 * (k / (n_layers - 1)) ** 1.15
    v_table[6] -= 0.35
    v_table[11] -= 0.45
    v = v_table[layer] + 0.25 * (s * n_layers - layer) / n_layers

    # Flat sediment blanket at the very top.
    v = np.where(zn < 0.04, 1.5, v)
    # Shallow low-velocity lens (gas pocket analog).
    lens = ((zn - 0.30) / 0.07) ** 2 + ((xn - 0.47) / 0.10) ** 2
    v = np.where(lens < 1.0, v - 0.55, v)
    # Deep high-velocity wedge on the right flank.
    wedge = (zn > 0.72 + 0.35 * (0.95 - xn)) & (xn > 0.55)
    v = np.where(wedge, np.maximum(v, 4.45), v)

    return VelocityModel(np.clip(v, 1.5, 4.7), dz, dx)
