"""Shared fixtures.

The desk-scale experiment suite (used by the ordering/similarity/spectral
acceptance tests) is session-scoped and lazy: it only runs when a test asks
for it, and its six training runs are computed once and shared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

import drfwi as D


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running test")
    config.addinivalue_line("markers", "fullscale: optional full-scale reference run")


@dataclass
class DeskProblem:
    """The shared desk-scale setup: one grid, two initial models."""

    m_true: D.VelocityModel
    m_init_smooth: D.VelocityModel
    m_init_linear: D.VelocityModel
    geometry: D.AcquisitionGeometry
    wavelet: D.SourceWavelet
    sim: D.SimConfig
    network: D.NetworkConfig
    observed: list


@dataclass
class DeskResults:
    """Reports of the six desk runs plus wall-clock bookkeeping."""

    problem: DeskProblem
    reports: dict  # (init_kind, mode) -> InversionReport
    total_seconds: float


def build_desk_problem() -> DeskProblem:
    m_true = D.downsample(D.synthetic_marmousi(), 2, 2)
    m_init_smooth = D.gaussian_smooth(m_true, 4.0)
    m_init_linear = D.linear_model(m_true.nz, m_true.nx, m_true.dz, m_true.dx, 1.5, 4.0)
    geometry = D.surface_line_geometry(m_true.nz, m_true.nx, 7)
    sim = D.SimConfig(
        dt=0.0024, nt=750, pml_width=20, pml_reference_velocity=6.2, backend="numba"
    )
    wavelet = D.ricker(6.0, sim.dt, sim.nt, 0.2)
    network = D.NetworkConfig(depth=4, width=128, omega=30.0)
    observed = D.forward_all_shots(m_true, geometry, wavelet, sim)
    return DeskProblem(
        m_true, m_init_smooth, m_init_linear, geometry, wavelet, sim, network, observed
    )


DESK_FWI_EPOCHS = 300
DESK_FWI_LR = 1e-4
DESK_PRETRAIN = {"smooth": (1000, 5e-5), "linear": (2500, 5e-5)}


@pytest.fixture(scope="session")
def desk_problem() -> DeskProblem:
    return build_desk_problem()


@pytest.fixture(scope="session")
def desk_results(desk_problem: DeskProblem) -> DeskResults:
    """Six full training runs: {smooth, linear} x {s-denorm, a-denorm, pretrain}."""
    import time

    t0 = time.perf_counter()
    reports = {}
    for init_kind, m_init in (
        ("smooth", desk_problem.m_init_smooth),
        ("linear", desk_problem.m_init_linear),
    ):
        pre_epochs, pre_lr = DESK_PRETRAIN[init_kind]
        for mode in ("s-denorm", "a-denorm", "pretrain"):
            cfg = D.TrainingConfig(
                mode=mode,
                fwi_epochs=DESK_FWI_EPOCHS,
                fwi_lr=DESK_FWI_LR,
                pretrain_epochs=pre_epochs,
                pretrain_lr=pre_lr,
                seed=0,
            )
            reports[(init_kind, mode)] = D.run_pipeline(
                desk_problem.m_true,
                m_init,
                desk_problem.geometry,
                desk_problem.wavelet,
                desk_problem.sim,
                desk_problem.network,
                cfg,
                observed=desk_problem.observed,
            )
    return DeskResults(desk_problem, reports, time.perf_counter() - t0)
