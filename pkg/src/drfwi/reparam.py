"""Denormalization layers mapping raw network output to velocity models.

Three modes share the algebra v = nm * S + base and differ in what the base
is and whether it trains:

  global-mean    base = M * 1 (constant), used by the two-stage pretrain route
  static-init    base = m_init, frozen
  adaptive-init  base = m_init, updated alongside the network parameters
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import VelocityModel, constant_model

__all__ = [
    "VELOCITY_FLOOR",
    "Reparameterization",
    "denormalize",
    "denormalize_with_mask",
    "denormalize_backward",
    "full_parameter_gradient",
]

log = logging.getLogger(__name__)

VELOCITY_FLOOR = 0.1  # km/s; outputs are clipped here and clipped cells get zero gradient

MODES = ("global-mean", "static-init", "adaptive-init")


@dataclass(frozen=True)
class Reparameterization:
    """Scale S (km/s) plus a base model; see module docstring for the modes."""

    mode: str
    std: float | np.ndarray
    base: VelocityModel
    mean: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown reparameterization mode '{self.mode}'")
        std = self.std
        if np.ndim(std) == 0:
            std = float(std)
            if std <= 0:
                raise ConfigurationError(f"std must be positive, got {std}")
        else:
            std = np.asarray(std, dtype=np.float64)
            if std.shape != self.base.shape:
                raise ConfigurationError(
                    f"std array shape {std.shape} != base shape {self.base.shape}"
                )
            if not np.all(std > 0):
                raise ConfigurationError("std array must be positive everywhere")
            std = std.copy()
            std.setflags(write=False)
        object.__setattr__(self, "std", std)

    @classmethod
    def global_mean(cls, std, mean: float, like: VelocityModel) -> "Reparameterization":
        base = constant_model(like.nz, like.nx, like.dz, like.dx, mean)
        return cls("global-mean", std, base, mean=float(mean))

    @classmethod
    def static_init(cls, std, m_init: VelocityModel) -> "Reparameterization":
        return cls("static-init", std, m_init)

    @classmethod
    def adaptive_init(cls, std, m_init: VelocityModel) -> "Reparameterization":
        return cls("adaptive-init", std, m_init)

    @property
    def trainable_init(self) -> bool:
        return self.mode == "adaptive-init"

    def with_base(self, base: VelocityModel) -> "Reparameterization":
        """Same mode and scale on an updated base (adaptive init training)."""
        return Reparameterization(self.mode, self.std, base, self.mean)


def _as_grid(r: Reparameterization, nm: np.ndarray) -> np.ndarray:
    nm = np.asarray(nm, dtype=np.float64)
    if nm.ndim == 1:
        if nm.size != r.base.nz * r.base.nx:
            raise ConfigurationError(
                f"network output has {nm.size} values, base grid has {r.base.nz * r.base.nx}"
            )
        nm = nm.reshape(r.base.shape)
    elif nm.shape != r.base.shape:
        raise ConfigurationError(f"network output shape {nm.shape} != base shape {r.base.shape}")
    return nm


def denormalize_with_mask(r: Reparameterization, nm: np.ndarray):
    """v = clip(nm * S + base, floor). Returns (model, pass_mask, n_clipped).

    pass_mask is True where the floor did not bind; clipped cells must receive
    zero gradient in the backward pass.
    """
    nm = _as_grid(r, nm)
    raw = nm * r.std + r.base.values
    mask = raw >= VELOCITY_FLOOR
    n_clipped = int(raw.size - np.count_nonzero(mask))
    if n_clipped:
        log.debug("velocity floor clipped %d cells", n_clipped)
    values = np.where(mask, raw, VELOCITY_FLOOR)
    return r.base.with_values(values), mask, n_clipped


def denormalize(r: Reparameterization, nm: np.ndarray) -> VelocityModel:
    model, _, _ = denormalize_with_mask(r, nm)
    return model


def denormalize_backward(
    r: Reparameterization,
    velocity_gradient: np.ndarray,
    clip_mask: np.ndarray | None = None,
):
    """Chain a velocity-space gradient back through the denormalization.

    Returns (output_gradient, init_gradient): output_gradient is flat (nz*nx,)
    ready for the network backward pass (dv/d_nm = S); init_gradient is the
    gradient on the base model when it trains (adaptive-init), else None.
    Cells listed False in clip_mask were clipped and get zero gradient.
    """
    vg = np.asarray(velocity_gradient, dtype=np.float64)
    if vg.shape != r.base.shape:
        raise ConfigurationError(f"gradient shape {vg.shape} != base shape {r.base.shape}")
    if clip_mask is not None:
        vg = np.where(clip_mask, vg, 0.0)
    output_gradient = (vg * r.std).ravel()
    init_gradient = vg.copy() if r.trainable_init else None
    return output_gradient, init_gradient


def full_parameter_gradient(
    net,
    grid,
    r: Reparameterization,
    velocity_gradient: np.ndarray,
    clip_mask: np.ndarray | None = None,
    cache=None,
):
    """dL/d(network params) and dL/d(m_init) from dL/d(velocity model).

    Composes denormalize_backward with the network backward pass. Returns
    (weight_grads, bias_grads, init_gradient).
    """
    from . import siren

    output_gradient, init_gradient = denormalize_backward(r, velocity_gradient, clip_mask)
    weight_grads, bias_grads = siren.backward(net, grid, output_gradient, cache=cache)
    return weight_grads, bias_grads, init_gradient
