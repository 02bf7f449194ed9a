"""Velocity model containers, generators, and grid/file utilities."""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import drfwi as D
from drfwi import GridField, ModelError


def make(values, dz=10.0, dx=10.0):
    return D.VelocityModel(np.asarray(values, dtype=np.float64), dz, dx)


class TestVelocityModel:
    def test_basic_properties(self):
        m = make([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], dz=5.0, dx=7.0)
        assert m.nz == 3 and m.nx == 2 and m.shape == (3, 2)
        assert m.dz == 5.0 and m.dx == 7.0

    def test_values_are_read_only(self):
        m = make([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises((ValueError, RuntimeError)):
            m.values[0, 0] = 9.0

    def test_rejects_nonpositive_velocity(self):
        with pytest.raises(ModelError):
            make([[1.0, -2.0], [3.0, 4.0]])
        with pytest.raises(ModelError):
            make([[0.0, 2.0], [3.0, 4.0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(ModelError):
            make([[1.0, np.nan], [3.0, 4.0]])
        with pytest.raises(ModelError):
            make([[1.0, np.inf], [3.0, 4.0]])

    def test_rejects_wrong_rank(self):
        with pytest.raises(ModelError):
            D.VelocityModel(np.ones(4), 10.0, 10.0)
        with pytest.raises(ModelError):
            D.VelocityModel(np.ones((2, 2, 2)), 10.0, 10.0)

    def test_rejects_bad_spacing(self):
        with pytest.raises(ModelError):
            make([[1.0]], dz=0.0)
        with pytest.raises(ModelError):
            make([[1.0]], dx=-1.0)

    def test_with_values_keeps_spacing(self):
        m = make([[1.0, 2.0]], dz=3.0, dx=4.0)
        m2 = m.with_values(np.array([[5.0, 6.0]]))
        assert m2.dz == 3.0 and m2.dx == 4.0
        assert np.array_equal(m2.values, [[5.0, 6.0]])
        # the original is untouched
        assert np.array_equal(m.values, [[1.0, 2.0]])


class TestGridField:
    def test_allows_signed_values(self):
        f = GridField(np.array([[-1.0, 0.0], [2.0, -3.0]]), 10.0, 10.0)
        assert f.shape == (2, 2)
        assert f.values.min() < 0

    def test_rejects_nonfinite(self):
        with pytest.raises(ModelError):
            GridField(np.array([[np.nan, 0.0]]), 10.0, 10.0)

    def test_read_only(self):
        f = GridField(np.zeros((2, 2)), 10.0, 10.0)
        with pytest.raises((ValueError, RuntimeError)):
            f.values[0, 0] = 1.0


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        m = D.VelocityModel(rng.uniform(1.5, 4.5, (9, 13)), 12.5, 17.5)
        path = tmp_path / "m.bin"
        D.save_model(m, path)
        m2 = D.load_model(path)
        assert m2.shape == m.shape
        assert m2.dz == m.dz and m2.dx == m.dx
        # stored as float32: one cast of rounding
        assert np.allclose(m2.values, m.values, rtol=1e-6, atol=0)
        # a second round trip is exact (values already representable)
        D.save_model(m2, tmp_path / "m2.bin")
        m3 = D.load_model(tmp_path / "m2.bin")
        assert np.array_equal(m3.values, m2.values)

    def test_sidecar_contents(self, tmp_path):
        m = make([[1.0, 2.0], [3.0, 4.0]], dz=5.0, dx=6.0)
        path = tmp_path / "m.bin"
        D.save_model(m, path)
        meta = json.loads((tmp_path / "m.bin.json").read_text())
        assert meta["nz"] == 2 and meta["nx"] == 2
        assert meta["dz"] == 5.0 and meta["dx"] == 6.0

    def test_load_size_mismatch(self, tmp_path):
        m = make([[1.0, 2.0], [3.0, 4.0]])
        D.save_model(m, tmp_path / "m.bin")
        meta = json.loads((tmp_path / "m.bin.json").read_text())
        meta["nx"] = 3
        (tmp_path / "m.bin.json").write_text(json.dumps(meta))
        with pytest.raises(ModelError):
            D.load_model(tmp_path / "m.bin")

    def test_load_missing_sidecar(self, tmp_path):
        (tmp_path / "m.bin").write_bytes(b"\x00" * 16)
        with pytest.raises(ModelError):
            D.load_model(tmp_path / "m.bin")


class TestGenerators:
    def test_constant_model(self):
        m = D.constant_model(3, 4, 10.0, 10.0, 2.5)
        assert m.shape == (3, 4)
        assert np.all(m.values == 2.5)

    def test_linear_model_endpoints(self):
        m = D.linear_model(5, 3, 10.0, 10.0, 1.5, 4.0)
        assert np.allclose(m.values[0, :], 1.5)
        assert np.allclose(m.values[-1, :], 4.0)
        # laterally invariant, monotone in depth
        assert np.allclose(m.values, m.values[:, :1])
        assert np.all(np.diff(m.values[:, 0]) > 0)

    def test_linear_model_single_row(self):
        m = D.linear_model(1, 3, 10.0, 10.0, 2.0, 9.0)
        assert np.allclose(m.values, 2.0)

    def test_gaussian_smooth_reduces_roughness(self):
        rng = np.random.default_rng(1)
        m = D.VelocityModel(rng.uniform(2.0, 4.0, (30, 40)), 10.0, 10.0)
        s = D.gaussian_smooth(m, 3.0)
        assert s.shape == m.shape
        rough = np.diff(m.values, axis=0).std()
        rough_s = np.diff(s.values, axis=0).std()
        assert rough_s < 0.2 * rough
        # smoothing stays within the original velocity range
        assert s.values.min() >= m.values.min() - 1e-12
        assert s.values.max() <= m.values.max() + 1e-12

    def test_gaussian_smooth_sigma_zero_is_identity(self):
        m = make([[1.0, 2.0], [3.0, 4.0]])
        s = D.gaussian_smooth(m, 0.0)
        assert np.array_equal(s.values, m.values)

    def test_downsample_strided(self):
        rng = np.random.default_rng(2)
        m = D.VelocityModel(rng.uniform(1.5, 4.5, (8, 12)), 10.0, 15.0)
        d = D.downsample(m, 2, 3)
        assert d.shape == (4, 4)
        assert np.array_equal(d.values, m.values[::2, ::3])
        assert d.dz == 20.0 and d.dx == 45.0

    def test_downsample_odd_sizes_keep_leading_cells(self):
        m = D.VelocityModel(np.arange(1, 31, dtype=float).reshape(5, 6), 10.0, 10.0)
        d = D.downsample(m, 2, 2)
        assert d.shape == (3, 3)
        assert np.array_equal(d.values, m.values[::2, ::2])

    def test_downsample_rejects_bad_factors(self):
        m = D.constant_model(5, 6, 10.0, 10.0, 2.0)
        with pytest.raises(ModelError):
            D.downsample(m, 0, 2)
        with pytest.raises(ModelError):
            D.downsample(m, 2, -1)

    def test_synthetic_marmousi_contract(self):
        m = D.synthetic_marmousi()
        assert m.shape == (94, 288)
        assert m.dz == 15.0 and m.dx == 15.0
        assert m.values.min() >= 1.5 - 1e-12
        assert m.values.max() <= 4.7 + 1e-12
        # water-like blanket on top, faster at depth
        assert np.allclose(m.values[0, :], m.values[0, 0])
        top = m.values[: m.nz // 3].mean()
        bottom = m.values[-m.nz // 3 :].mean()
        assert bottom > top + 0.5
        # deterministic
        m2 = D.synthetic_marmousi()
        assert np.array_equal(m.values, m2.values)
        # laterally structured (not layer-cake): some dip/faulting
        assert np.abs(np.diff(m.values, axis=1)).max() > 0.1


class TestCoordinateGrid:
    def test_corners_and_layout(self):
        g = D.make_coordinate_grid(3, 4)
        pts = g.points
        assert pts.shape == (12, 2)
        # row-major: point index i*nx + j
        assert np.allclose(pts[0], [-1.0, -1.0])
        assert np.allclose(pts[3], [-1.0, 1.0])
        assert np.allclose(pts[8], [1.0, -1.0])
        assert np.allclose(pts[11], [1.0, 1.0])
        # z varies slowest
        assert np.allclose(pts[:4, 0], -1.0)
        assert np.allclose(pts[4:8, 0], 0.0)

    def test_single_point_axis_is_centered(self):
        g = D.make_coordinate_grid(1, 3)
        assert np.allclose(g.points[:, 0], 0.0)
        assert np.allclose(g.points[:, 1], [-1.0, 0.0, 1.0])

    @given(nz=st.integers(2, 40), nx=st.integers(2, 40))
    @settings(max_examples=30, deadline=None)
    def test_bounds_and_shape(self, nz, nx):
        g = D.make_coordinate_grid(nz, nx)
        pts = g.points
        assert pts.shape == (nz * nx, 2)
        assert pts.min() >= -1.0 and pts.max() <= 1.0
        assert np.isclose(pts[:, 0].min(), -1.0) and np.isclose(pts[:, 0].max(), 1.0)
        assert np.isclose(pts[:, 1].min(), -1.0) and np.isclose(pts[:, 1].max(), 1.0)
