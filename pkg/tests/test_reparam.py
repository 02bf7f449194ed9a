"""Output denormalization: modes, velocity floor, gradient chaining."""

from __future__ import annotations

import numpy as np
import pytest

import drfwi as D
from drfwi import ConfigurationError
from drfwi.reparam import (
    VELOCITY_FLOOR,
    Reparameterization,
    denormalize,
    denormalize_backward,
    denormalize_with_mask,
    full_parameter_gradient,
)
from drfwi.siren import flatten_grads, flatten_params, forward, init_network, unflatten_params


def base_model(nz=4, nx=5):
    rng = np.random.default_rng(7)
    return D.VelocityModel(2.0 + rng.random((nz, nx)), 10.0, 10.0)


class TestConstruction:
    def test_mode_validation(self):
        with pytest.raises(ConfigurationError):
            Reparameterization("fancy", 1.0, base_model())

    def test_std_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            Reparameterization("static-init", 0.0, base_model())
        with pytest.raises(ConfigurationError):
            Reparameterization("static-init", -1.0, base_model())

    def test_std_array_shape_and_sign(self):
        m = base_model()
        with pytest.raises(ConfigurationError):
            Reparameterization("static-init", np.ones((2, 2)), m)
        bad = np.ones(m.shape)
        bad[1, 1] = 0.0
        with pytest.raises(ConfigurationError):
            Reparameterization("static-init", bad, m)
        ok = Reparameterization("static-init", np.full(m.shape, 0.5), m)
        assert isinstance(ok.std, np.ndarray)

    def test_global_mean_base_is_constant(self):
        m = base_model()
        r = Reparameterization.global_mean(1.0, 3.0, m)
        assert np.all(r.base.values == 3.0)
        assert r.base.shape == m.shape
        assert r.mean == 3.0
        assert not r.trainable_init

    def test_adaptive_is_trainable(self):
        assert Reparameterization.adaptive_init(1.0, base_model()).trainable_init
        assert not Reparameterization.static_init(1.0, base_model()).trainable_init

    def test_with_base_keeps_mode_and_std(self):
        m = base_model()
        r = Reparameterization.adaptive_init(0.7, m)
        m2 = m.with_values(m.values + 0.1)
        r2 = r.with_base(m2)
        assert r2.mode == "adaptive-init" and r2.std == 0.7
        assert np.array_equal(r2.base.values, m2.values)


class TestDenormalize:
    def test_zero_output_recovers_base_exactly(self):
        m = base_model()
        for r in (
            Reparameterization.static_init(1.0, m),
            Reparameterization.adaptive_init(2.0, m),
        ):
            v = denormalize(r, np.zeros(m.nz * m.nx))
            assert np.array_equal(v.values, m.values)

    def test_zero_output_global_mean_is_constant(self):
        m = base_model()
        r = Reparameterization.global_mean(1.0, 3.0, m)
        v = denormalize(r, np.zeros(m.nz * m.nx))
        assert np.all(v.values == 3.0)

    def test_affine_map(self):
        m = base_model()
        r = Reparameterization.static_init(0.5, m)
        rng = np.random.default_rng(0)
        nm = rng.normal(size=m.nz * m.nx)
        v = denormalize(r, nm)
        assert np.allclose(v.values, nm.reshape(m.shape) * 0.5 + m.values)

    def test_flat_and_grid_inputs_agree(self):
        m = base_model()
        r = Reparameterization.static_init(1.0, m)
        rng = np.random.default_rng(1)
        nm = rng.normal(size=(m.nz, m.nx))
        assert np.array_equal(denormalize(r, nm).values, denormalize(r, nm.ravel()).values)

    def test_wrong_size_rejected(self):
        r = Reparameterization.static_init(1.0, base_model())
        with pytest.raises(ConfigurationError):
            denormalize(r, np.zeros(7))

    def test_floor_clipping_and_mask(self):
        m = base_model()
        r = Reparameterization.static_init(1.0, m)
        nm = np.zeros(m.shape)
        nm[1, 2] = -100.0  # drives velocity far below the floor
        v, mask, n_clipped = denormalize_with_mask(r, nm)
        assert n_clipped == 1
        assert not mask[1, 2] and mask.sum() == m.nz * m.nx - 1
        assert v.values[1, 2] == VELOCITY_FLOOR
        assert v.values.min() >= VELOCITY_FLOOR


class TestBackward:
    def test_scale_chaining(self):
        m = base_model()
        r = Reparameterization.static_init(0.25, m)
        vg = np.ones(m.shape)
        out_g, init_g = denormalize_backward(r, vg)
        assert np.all(out_g == 0.25)
        assert out_g.shape == (m.nz * m.nx,)
        assert init_g is None

    def test_adaptive_init_gradient_passthrough(self):
        m = base_model()
        r = Reparameterization.adaptive_init(0.25, m)
        rng = np.random.default_rng(2)
        vg = rng.normal(size=m.shape)
        out_g, init_g = denormalize_backward(r, vg)
        assert np.array_equal(init_g, vg)  # dv/d_base = identity
        assert np.allclose(out_g, (vg * 0.25).ravel())

    def test_clip_mask_zeroes_gradient(self):
        m = base_model()
        r = Reparameterization.adaptive_init(1.0, m)
        vg = np.ones(m.shape)
        mask = np.ones(m.shape, dtype=bool)
        mask[2, 3] = False
        out_g, init_g = denormalize_backward(r, vg, clip_mask=mask)
        assert out_g[2 * m.nx + 3] == 0.0
        assert init_g[2, 3] == 0.0
        assert out_g.sum() == m.nz * m.nx - 1

    def test_full_parameter_gradient_matches_fd(self):
        """d(loss)/d(theta) through denormalize(f_theta) against central FD."""
        m = base_model(3, 4)
        grid = D.make_coordinate_grid(3, 4)
        r = Reparameterization.static_init(0.6, m)
        net = init_network(2, 4, 30.0, seed=5, zero_final=False)
        rng = np.random.default_rng(3)
        target = rng.normal(size=m.shape) + m.values

        def loss_of(flat):
            v = denormalize(r, forward(unflatten_params(net, flat), grid))
            d = v.values - target
            return 0.5 * float(np.sum(d * d))

        v0, mask, _ = denormalize_with_mask(r, forward(net, grid))
        vg = v0.values - target
        wg, bg, init_g = full_parameter_gradient(net, grid, r, vg, clip_mask=mask)
        assert init_g is None
        analytic = flatten_grads(wg, bg)
        flat0 = flatten_params(net)
        # loss is O(10); h = 1e-5 keeps central-difference roundoff (~eps*|L|/h)
        # two decades under the tolerance for gradients of this scale
        h = 1e-5
        for k in range(0, flat0.size, 3):
            plus, minus = flat0.copy(), flat0.copy()
            plus[k] += h
            minus[k] -= h
            fd = (loss_of(plus) - loss_of(minus)) / (2 * h)
            denom = max(abs(fd), abs(analytic[k]), 1e-12)
            assert abs(fd - analytic[k]) / denom < 1e-6

    def test_shape_mismatch_rejected(self):
        r = Reparameterization.static_init(1.0, base_model())
        with pytest.raises(ConfigurationError):
            denormalize_backward(r, np.ones((2, 2)))
