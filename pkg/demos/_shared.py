"""Shared toy problem for the demo scripts: a small gradient-background model
with two velocity anomalies, three surface shots, and a 10 Hz source."""

from __future__ import annotations

from pathlib import Path

import numpy as np

import drfwi as D

OUT = Path(__file__).resolve().parent / "out"


def toy_problem():
    """(m_true, m_init, geometry, wavelet, sim) — runs in seconds on one core."""
    nz, nx, h = 28, 40, 25.0
    background = np.linspace(2.0, 3.2, nz)[:, None] * np.ones((1, nx))
    vals = background.copy()
    zz, xx = np.mgrid[0:nz, 0:nx]
    vals += 0.35 * np.exp(-(((zz - 12) / 4.0) ** 2 + ((xx - 13) / 5.0) ** 2))
    vals -= 0.30 * np.exp(-(((zz - 18) / 4.0) ** 2 + ((xx - 28) / 5.0) ** 2))
    m_true = D.VelocityModel(vals, h, h)
    m_init = D.VelocityModel(background, h, h)

    geometry = D.surface_line_geometry(nz, nx, n_sources=3)
    sim = D.SimConfig(
        dt=0.002, nt=400, pml_width=16, backend="numba",
        pml_reference_velocity=3.6,
    )
    wavelet = D.ricker(10.0, sim.dt, sim.nt, 0.12)
    return m_true, m_init, geometry, wavelet, sim


def ensure_out() -> Path:
    OUT.mkdir(exist_ok=True)
    return OUT
