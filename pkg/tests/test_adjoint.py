"""Misfit gradients: adjoint identity, finite differences, tape modes."""

from __future__ import annotations

import numpy as np
import pytest

import drfwi as D
from drfwi import ConfigurationError
from drfwi.adjoint import adjoint_apply, linearized_forward, misfit_gradient


def small_problem(backend="numba", nz=10, nx=14, seed=3, free_surface=True):
    rng = np.random.default_rng(seed)
    m0 = D.VelocityModel(2.0 + 0.4 * rng.random((nz, nx)), 10.0, 10.0)
    m1 = D.VelocityModel(2.0 + 0.4 * rng.random((nz, nx)), 10.0, 10.0)
    geometry = D.AcquisitionGeometry(
        np.array([[1, 3], [1, nx - 3]]),
        np.column_stack([np.ones(nx, int), np.arange(nx)]),
    )
    cfg = D.SimConfig(
        dt=0.0015, nt=160, pml_width=8, backend=backend,
        pml_reference_velocity=3.0, free_surface=free_surface,
    )
    wavelet = D.ricker(14.0, cfg.dt, cfg.nt, 0.07)
    return m0, m1, geometry, wavelet, cfg


class TestAdjointIdentity:
    @pytest.mark.parametrize("backend", ["numpy", "numba"])
    def test_dot_product_identity(self, backend):
        """<J dm, dd> == <dm, J^T dd> for random perturbations."""
        m0, _, geometry, wavelet, cfg = small_problem(backend=backend)
        rng = np.random.default_rng(11)
        dm = rng.normal(size=m0.shape)
        dm[0, :] = 0.0  # the pinned surface row carries no sensitivity
        dd = rng.normal(size=(geometry.n_sources, cfg.nt, geometry.n_receivers))
        j_dm = linearized_forward(m0, dm, geometry, wavelet, cfg)
        jt_dd = adjoint_apply(m0, geometry, wavelet, dd, cfg)
        lhs = float(np.sum(j_dm * dd))
        rhs = float(np.sum(dm * jt_dd.values))
        assert abs(lhs - rhs) / max(abs(lhs), abs(rhs)) < 1e-10

    def test_dot_product_identity_absorbing_top(self):
        m0, _, geometry, wavelet, cfg = small_problem(free_surface=False)
        rng = np.random.default_rng(12)
        dm = rng.normal(size=m0.shape)
        dd = rng.normal(size=(geometry.n_sources, cfg.nt, geometry.n_receivers))
        lhs = float(np.sum(linearized_forward(m0, dm, geometry, wavelet, cfg) * dd))
        rhs = float(np.sum(dm * adjoint_apply(m0, geometry, wavelet, dd, cfg).values))
        assert abs(lhs - rhs) / max(abs(lhs), abs(rhs)) < 1e-10


class TestGradientAccuracy:
    def test_per_cell_finite_differences(self):
        """dL/dm at scattered cells (PML-adjacent corners included)."""
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        _, grad = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        h = 1e-5
        cells = [(1, 3), (2, 7), (5, 5), (8, 12), (9, 0), (4, 13), (1, 0), (9, 13)]
        for i, j in cells:
            vp = m0.values.copy()
            vp[i, j] += h
            vm = m0.values.copy()
            vm[i, j] -= h
            lp, _ = misfit_gradient(
                D.VelocityModel(vp, m0.dz, m0.dx), geometry, wavelet, observed, cfg
            )
            lm, _ = misfit_gradient(
                D.VelocityModel(vm, m0.dz, m0.dx), geometry, wavelet, observed, cfg
            )
            fd = (lp - lm) / (2 * h)
            an = grad.values[i, j]
            rel = abs(fd - an) / max(abs(fd), abs(an))
            assert rel < 1e-6, f"cell ({i},{j}): fd={fd:.6e} adj={an:.6e} rel={rel:.2e}"

    def test_surface_row_gradient_zero(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        _, grad = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        assert np.all(grad.values[0, :] == 0.0)
        assert np.abs(grad.values[1:, :]).max() > 0.0

    def test_zero_residual_zero_gradient(self):
        m0, _, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m0, geometry, wavelet, cfg)
        loss, grad = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        assert loss == 0.0
        assert np.all(grad.values == 0.0)

    def test_gradient_scales_with_residual(self):
        # J^T is linear: doubling the data perturbation doubles the output
        m0, _, geometry, wavelet, cfg = small_problem()
        rng = np.random.default_rng(4)
        dd = rng.normal(size=(geometry.n_sources, cfg.nt, geometry.n_receivers))
        g1 = adjoint_apply(m0, geometry, wavelet, dd, cfg).values
        g2 = adjoint_apply(m0, geometry, wavelet, 2.0 * dd, cfg).values
        assert np.allclose(g2, 2.0 * g1, rtol=1e-12, atol=1e-18)


class TestTapeModes:
    def test_checkpoint_matches_full_tape_bitwise(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        loss_full, grad_full = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        for interval in (1, 7, 10, 160, 1000):
            cfg_ck = D.SimConfig(
                dt=cfg.dt, nt=cfg.nt, pml_width=cfg.pml_width, backend=cfg.backend,
                pml_reference_velocity=cfg.pml_reference_velocity,
                tape="checkpoint", checkpoint_interval=interval,
            )
            loss_ck, grad_ck = misfit_gradient(m0, geometry, wavelet, observed, cfg_ck)
            assert loss_ck == loss_full
            assert np.array_equal(grad_ck.values, grad_full.values), f"interval={interval}"

    def test_workspace_reuse_changes_nothing(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        loss_ref, grad_ref = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        ws = {}
        for _ in range(3):
            loss, grad = misfit_gradient(m0, geometry, wavelet, observed, cfg, workspace=ws)
            assert loss == loss_ref
            assert np.array_equal(grad.values, grad_ref.values)
        assert "tape" in ws

    def test_workspace_survives_config_change(self):
        # a smaller follow-up problem must not be corrupted by the larger tape
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        ws = {}
        misfit_gradient(m0, geometry, wavelet, observed, cfg, workspace=ws)
        cfg_short = D.SimConfig(
            dt=cfg.dt, nt=100, pml_width=8, backend=cfg.backend,
            pml_reference_velocity=3.0,
        )
        w_short = D.ricker(14.0, cfg.dt, 100, 0.07)
        obs_short = D.forward_all_shots(m1, geometry, w_short, cfg_short)
        ref_loss, ref_grad = misfit_gradient(m0, geometry, w_short, obs_short, cfg_short)
        loss, grad = misfit_gradient(m0, geometry, w_short, obs_short, cfg_short, workspace=ws)
        assert loss == ref_loss
        assert np.array_equal(grad.values, ref_grad.values)


class TestValidation:
    def test_wrong_record_count(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        with pytest.raises(ConfigurationError):
            misfit_gradient(m0, geometry, wavelet, observed[:1], cfg)

    def test_wrong_trace_shape(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        bad = [
            D.ShotRecord(
                r.traces[:-1], r.dt, r.source_index, r.source_cell, r.receivers
            )
            for r in observed
        ]
        with pytest.raises(ConfigurationError):
            misfit_gradient(m0, geometry, wavelet, bad, cfg)

    def test_gradient_values_read_only(self):
        m0, m1, geometry, wavelet, cfg = small_problem()
        observed = D.forward_all_shots(m1, geometry, wavelet, cfg)
        _, grad = misfit_gradient(m0, geometry, wavelet, observed, cfg)
        with pytest.raises((ValueError, RuntimeError)):
            grad.values[1, 1] = 0.0

    def test_perturbation_shape_checked(self):
        m0, _, geometry, wavelet, cfg = small_problem()
        with pytest.raises(ConfigurationError):
            linearized_forward(m0, np.zeros((3, 3)), geometry, wavelet, cfg)
