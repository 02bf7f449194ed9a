"""Diagnostics: image metrics, wavenumber spectra, parameter similarity.

The metrics are checked against deliberately naive double-loop
reimplementations (tests/oracles.py) and closed-form special cases.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import drfwi as D
from drfwi import GridField, MetricsError
from drfwi.diagnostics import (
    compute_metrics,
    default_profile_columns,
    parameter_similarity,
    similarity_report,
    ssim,
    target_decomposition,
    wavenumber_spectrum,
)
from drfwi.reparam import Reparameterization
from drfwi.siren import init_network, unflatten_params
from oracles import (
    brute_force_mae,
    brute_force_mse,
    brute_force_r2,
    brute_force_ssim,
    dft_magnitudes,
)


def random_pair(rng, nz=20, nx=20, scale=1.0):
    truth = 3.0 + scale * rng.normal(size=(nz, nx))
    predicted = truth + 0.3 * scale * rng.normal(size=(nz, nx))
    return predicted, truth


class TestMetricsAgainstBruteForce:
    def test_fifty_random_pairs(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            predicted, truth = random_pair(rng)
            got = compute_metrics(predicted, truth)
            assert abs(got.mse - brute_force_mse(predicted, truth)) < 1e-12
            assert abs(got.mae - brute_force_mae(predicted, truth)) < 1e-12
            assert abs(got.r2 - brute_force_r2(predicted, truth)) < 1e-12
            data_range = float(truth.max() - truth.min())
            assert abs(got.ssim - brute_force_ssim(predicted, truth, data_range)) < 1e-9

    def test_identity_metrics(self):
        rng = np.random.default_rng(3)
        _, truth = random_pair(rng)
        got = compute_metrics(truth, truth)
        assert got.mse == 0.0 and got.mae == 0.0
        assert got.r2 == 1.0
        assert got.ssim == pytest.approx(1.0, abs=1e-12)

    def test_constant_offset_closed_form(self):
        rng = np.random.default_rng(4)
        truth = 3.0 + rng.normal(size=(15, 17))
        c = 0.37
        got = compute_metrics(truth + c, truth)
        assert got.mse == pytest.approx(c * c, rel=1e-12)
        assert got.mae == pytest.approx(c, rel=1e-12)
        var = float(np.mean((truth - truth.mean()) ** 2))
        assert got.r2 == pytest.approx(1.0 - c * c / var, rel=1e-12)

    def test_velocity_model_inputs_accepted(self):
        rng = np.random.default_rng(5)
        a = D.VelocityModel(3.0 + rng.random((12, 13)), 10.0, 10.0)
        b = D.VelocityModel(3.0 + rng.random((12, 13)), 10.0, 10.0)
        got = compute_metrics(a, b)
        assert got.mse == pytest.approx(float(np.mean((a.values - b.values) ** 2)))

    def test_zero_variance_truth_rejected(self):
        with pytest.raises(MetricsError):
            compute_metrics(np.ones((12, 12)), np.full((12, 12), 2.0))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(MetricsError):
            compute_metrics(np.ones((12, 12)), np.ones((12, 13)) * 2)

    def test_as_dict_round_trip(self):
        rng = np.random.default_rng(6)
        predicted, truth = random_pair(rng)
        got = compute_metrics(predicted, truth)
        d = got.as_dict()
        assert set(d) == {"mse", "mae", "r2", "ssim"}
        assert d["mse"] == got.mse


class TestSsim:
    def test_too_small_input_rejected(self):
        with pytest.raises(MetricsError):
            ssim(np.ones((10, 16)), np.ones((10, 16)) * 2, data_range=1.0)

    def test_bad_data_range_rejected(self):
        a = np.random.default_rng(0).random((12, 12))
        with pytest.raises(MetricsError):
            ssim(a, a, data_range=0.0)

    def test_dissimilar_below_one(self):
        rng = np.random.default_rng(7)
        truth = rng.normal(size=(20, 20))
        noisy = truth + rng.normal(size=(20, 20))
        v = ssim(noisy, truth, data_range=float(np.ptp(truth)))
        assert v < 0.9

    def test_anticorrelated_is_negative(self):
        # shared bright mean, opposite fluctuations: the luminance factor is
        # positive while the structure factor is negative
        rng = np.random.default_rng(8)
        noise = rng.normal(size=(24, 24))
        truth = 5.0 + noise
        pred = 5.0 - noise
        v = ssim(pred, truth, data_range=float(np.ptp(truth)))
        assert v < 0.0

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_symmetric_under_swap(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(14, 14))
        b = rng.normal(size=(14, 14))
        assert ssim(a, b, data_range=2.0) == pytest.approx(
            ssim(b, a, data_range=2.0), abs=1e-13
        )

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_bounded_by_one(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(13, 15))
        b = rng.normal(size=(13, 15))
        assert ssim(a, b, data_range=4.0) <= 1.0 + 1e-12


class TestWavenumberSpectrum:
    def test_matches_naive_dft(self):
        rng = np.random.default_rng(9)
        m = D.VelocityModel(2.0 + rng.random((23, 8)), 12.0, 12.0)
        profiles = wavenumber_spectrum(m, lateral_indices=[3])
        oracle = dft_magnitudes(m.values[:, 3])
        assert np.allclose(profiles[0].magnitudes, oracle, rtol=1e-10, atol=1e-10)

    def test_axis_in_cycles_per_km(self):
        m = D.constant_model(40, 6, 25.0, 25.0, 2.0)  # 1 km deep
        profiles = wavenumber_spectrum(m, lateral_indices=[2])
        freqs = profiles[0].wavenumbers
        assert freqs[0] == 0.0
        assert freqs[1] == pytest.approx(1.0, rel=1e-12)  # one cycle per km
        assert freqs.size == 21

    def test_constant_profile_is_silent(self):
        m = D.constant_model(30, 6, 10.0, 10.0, 2.5)
        profiles = wavenumber_spectrum(m, lateral_indices=[0, 5])
        for p in profiles:
            assert np.allclose(p.magnitudes, 0.0, atol=1e-12)

    def test_pure_tone_single_bin(self):
        nz, cycles = 48, 5
        z = np.arange(nz)
        tone = 3.0 + 0.5 * np.cos(2 * np.pi * cycles * z / nz)
        m = D.VelocityModel(np.tile(tone[:, None], (1, 4)), 10.0, 10.0)
        p = wavenumber_spectrum(m, lateral_indices=[1])[0]
        k = int(np.argmax(p.magnitudes))
        assert k == cycles
        others = np.delete(p.magnitudes, k)
        assert others.max() < 1e-10 * p.magnitudes[k]

    @given(seed=st.integers(0, 10_000), nz=st.integers(8, 60))
    @settings(max_examples=25, deadline=None)
    def test_parseval(self, seed, nz):
        rng = np.random.default_rng(seed)
        col = 2.0 + rng.random(nz)
        m = D.VelocityModel(np.tile(col[:, None], (1, 3)), 10.0, 10.0)
        p = wavenumber_spectrum(m, lateral_indices=[0])[0]
        x = col - col.mean()
        energy_time = float(np.sum(x * x))
        mags = p.magnitudes
        # one-sided spectrum: double the interior bins, nyquist unpaired when even
        e = mags[0] ** 2 + 2.0 * float(np.sum(mags[1:-1] ** 2))
        e += mags[-1] ** 2 if nz % 2 == 0 else 2.0 * mags[-1] ** 2
        assert e / nz == pytest.approx(energy_time, rel=1e-10, abs=1e-12)

    def test_default_columns(self):
        assert default_profile_columns(144) == [29, 57, 86, 114]
        assert default_profile_columns(18) == [3, 7, 10, 14]

    def test_default_columns_too_narrow(self):
        with pytest.raises(MetricsError):
            default_profile_columns(4)

    def test_out_of_range_index(self):
        m = D.constant_model(20, 6, 10.0, 10.0, 2.0)
        with pytest.raises(MetricsError):
            wavenumber_spectrum(m, lateral_indices=[6])

    def test_grid_field_input(self):
        f = GridField(np.random.default_rng(1).normal(size=(20, 6)), 10.0, 10.0)
        profiles = wavenumber_spectrum(f, lateral_indices=[2])
        assert profiles[0].magnitudes.size == 11


class TestTargetDecomposition:
    def test_global_mean_target_is_full_model(self):
        rng = np.random.default_rng(10)
        m_true = D.VelocityModel(2.0 + rng.random((8, 9)), 10.0, 10.0)
        r = Reparameterization.global_mean(1.0, 3.0, m_true)
        target, perturbation = target_decomposition(m_true, r)
        assert np.array_equal(target.values, m_true.values)
        assert np.allclose(perturbation.values, m_true.values - 3.0)
        assert isinstance(perturbation, GridField)

    def test_init_based_target_is_residual(self):
        rng = np.random.default_rng(11)
        m_true = D.VelocityModel(2.0 + rng.random((8, 9)), 10.0, 10.0)
        m_init = D.gaussian_smooth(m_true, 2.0)
        r = Reparameterization.static_init(1.0, m_init)
        target, perturbation = target_decomposition(m_true, r)
        assert np.array_equal(target.values, m_true.values)
        assert np.allclose(perturbation.values, m_true.values - m_init.values)
        # signed values survive (a VelocityModel could not hold them)
        assert perturbation.values.min() < 0

    def test_perfect_init_leaves_nothing(self):
        m_true = D.constant_model(8, 9, 10.0, 10.0, 2.5)
        r = Reparameterization.static_init(1.0, m_true)
        _, perturbation = target_decomposition(m_true, r)
        assert np.all(perturbation.values == 0.0)


class TestParameterSimilarity:
    def random_net(self, seed):
        skeleton = init_network(3, 6, 30.0, seed=seed, zero_final=False)
        rng = np.random.default_rng(seed + 99)
        return unflatten_params(skeleton, rng.normal(size=skeleton.n_params))

    def test_identical_nets(self):
        net = self.random_net(0)
        rows = parameter_similarity(net, net)
        assert len(rows) == 2 * (net.depth + 1)
        for row in rows:
            assert row.cosine_similarity == pytest.approx(1.0, abs=1e-12)
            assert row.euclidean_distance == 0.0

    def test_negated_nets(self):
        net = self.random_net(1)
        neg = unflatten_params(net, -np.concatenate(
            [w.ravel() for pair in zip(net.weights, net.biases) for w in pair]
        ))
        rows = parameter_similarity(net, neg)
        for row in rows:
            assert row.cosine_similarity == pytest.approx(-1.0, abs=1e-12)

    def test_row_identities(self):
        net = self.random_net(2)
        rows = parameter_similarity(net, net)
        assert [r.layer for r in rows] == [
            "L0.weight", "L0.bias", "L1.weight", "L1.bias",
            "L2.weight", "L2.bias", "L3.weight", "L3.bias",
        ]

    def test_zero_norm_rows_undefined(self):
        a = init_network(2, 4, 30.0, seed=0)  # zero final layer
        rows = parameter_similarity(a, a)
        by_name = {r.layer: r for r in rows}
        assert by_name["L2.weight"].cosine_similarity is None
        assert by_name["L2.bias"].cosine_similarity is None
        assert by_name["L2.weight"].euclidean_distance == 0.0
        assert by_name["L0.weight"].cosine_similarity == pytest.approx(1.0)
        assert by_name["L0.bias"].cosine_similarity == pytest.approx(1.0)

    @given(scale=st.floats(0.1, 50.0), seed=st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_cosine_scale_invariance(self, scale, seed):
        net_a = self.random_net(seed)
        net_b = self.random_net(seed + 1)
        flat_a = np.concatenate(
            [x.ravel() for pair in zip(net_a.weights, net_a.biases) for x in pair]
        )
        scaled = unflatten_params(net_a, scale * flat_a)
        base_rows = parameter_similarity(net_a, net_b)
        scaled_rows = parameter_similarity(scaled, net_b)
        for r1, r2 in zip(base_rows, scaled_rows):
            assert r2.cosine_similarity == pytest.approx(r1.cosine_similarity, abs=1e-10)

    def test_architecture_mismatch(self):
        with pytest.raises(MetricsError):
            parameter_similarity(self.random_net(0), init_network(2, 6, 30.0, seed=0))


class TestSimilarityReport:
    def nets(self, n):
        out = []
        for seed in range(n):
            skeleton = init_network(2, 4, 30.0, seed=seed, zero_final=False)
            rng = np.random.default_rng(seed + 7)
            out.append(unflatten_params(skeleton, rng.normal(size=skeleton.n_params)))
        return out

    def test_three_checkpoints_two_comparisons(self):
        a, b, c = self.nets(3)
        rep = similarity_report([("INI", a), ("Stage1", b), ("Stage2", c)])
        names = [name for name, _ in rep.comparisons]
        assert names == ["Stage1 vs INI", "Stage1 vs Stage2"]
        for _, rows in rep.comparisons:
            assert len(rows) == 6

    def test_two_checkpoints_one_comparison(self):
        a, b = self.nets(2)
        rep = similarity_report([("INI", a), ("FWI", b)])
        assert [name for name, _ in rep.comparisons] == ["FWI vs INI"]

    def test_mean_weight_cosine_averages_defined_rows(self):
        a, b = self.nets(2)
        rep = similarity_report([("INI", a), ("FWI", b)])
        rows = rep.comparisons[0][1]
        defined_cs = [
            r.cosine_similarity for r in rows if r.cosine_similarity is not None
        ]
        assert rep.mean_weight_cosine("FWI vs INI") == pytest.approx(
            float(np.mean(defined_cs))
        )
        # bias rows participate: the mean is not the weights-only mean here
        weight_cs = [
            r.cosine_similarity for r in rows
            if r.layer.endswith(".weight") and r.cosine_similarity is not None
        ]
        assert len(defined_cs) > len(weight_cs)

    def test_identical_run_reports_unity(self):
        (a,) = self.nets(1)
        rep = similarity_report([("INI", a), ("FWI", a)])
        assert rep.mean_weight_cosine("FWI vs INI") == pytest.approx(1.0)

    def test_wrong_count_rejected(self):
        (a,) = self.nets(1)
        with pytest.raises(MetricsError):
            similarity_report([("only", a)])

    def test_unknown_comparison_name(self):
        a, b = self.nets(2)
        rep = similarity_report([("INI", a), ("FWI", b)])
        with pytest.raises(MetricsError):
            rep.mean_weight_cosine("nope")
