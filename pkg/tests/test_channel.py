"""Channel model: array responses, ray sampling, assembly, beamspace."""

import numpy as np
import pytest

from onebit_jce.channel import (
    ChannelModelConfig,
    RaySet,
    array_response,
    assemble_channel,
    dft_matrix,
    from_beamspace,
    laplacian_angle_offsets,
    sample_rays,
    to_beamspace,
)


def brute_force_channel(rays, config):
    """Oracle: literal double loop over clusters and rays."""
    h = np.zeros((config.n_rx, config.n_tx), dtype=complex)
    idx = 0
    for _ in range(config.n_clusters):
        for _ in range(config.rays_per_cluster):
            a_r = array_response(config.n_rx, rays.aoa_spatial_freq[idx])
            a_t = array_response(config.n_tx, rays.aod_spatial_freq[idx])
            h += rays.gains[idx] * np.outer(a_r, a_t.conj()) / np.sqrt(config.rays_per_cluster)
            idx += 1
    return h / np.sqrt(config.n_clusters)


class TestArrayResponse:
    def test_zero_angle_is_all_ones(self):
        assert np.array_equal(array_response(4, 0.0), np.ones(4))

    def test_pi_alternates(self):
        np.testing.assert_allclose(array_response(2, np.pi), [1, -1], atol=1e-15)

    def test_squared_norm_is_n(self):
        v = array_response(8, 0.7)
        assert np.linalg.norm(v) ** 2 == pytest.approx(8.0, abs=1e-12)

    def test_element_phase_progression(self):
        v = array_response(5, 0.3)
        np.testing.assert_allclose(v, np.exp(1j * 0.3 * np.arange(5)), atol=1e-15)

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            array_response(0, 0.1)


class TestConfigValidation:
    @pytest.mark.parametrize("kw", [
        {"n_tx": 0}, {"n_rx": 0}, {"n_clusters": 0}, {"rays_per_cluster": 0},
        {"angle_spread_deg": 0.0}, {"antenna_spacing_ratio": -0.5},
    ])
    def test_bad_config_rejected(self, kw):
        with pytest.raises(ValueError):
            ChannelModelConfig(**kw)


class TestSampleRays:
    def test_single_ray_cardinality(self):
        cfg = ChannelModelConfig(n_clusters=1, rays_per_cluster=1)
        rays = sample_rays(cfg, np.random.default_rng(0))
        assert len(rays.gains) == 1

    def test_default_cardinality(self):
        # 2 clusters x 15 rays
        cfg = ChannelModelConfig()
        rays = sample_rays(cfg, np.random.default_rng(0))
        assert len(rays.gains) == 30

    def test_angle_spread_std(self):
        # Monte Carlo oracle on the Laplacian sampler: std of (ray angle -
        # cluster center) should equal the configured spread
        offsets = laplacian_angle_offsets(10.0, 100_000, np.random.default_rng(42))
        assert np.std(offsets) == pytest.approx(np.deg2rad(10.0), rel=0.02)

    def test_gain_variance_unit(self):
        cfg = ChannelModelConfig(n_clusters=1, rays_per_cluster=100_000)
        rays = sample_rays(cfg, np.random.default_rng(3))
        assert np.mean(np.abs(rays.gains) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_spatial_freqs_bounded_for_half_wavelength(self):
        cfg = ChannelModelConfig(antenna_spacing_ratio=0.5, n_clusters=2,
                                 rays_per_cluster=500)
        rays = sample_rays(cfg, np.random.default_rng(5))
        assert np.all(np.abs(rays.aoa_spatial_freq) <= np.pi)
        assert np.all(np.abs(rays.aod_spatial_freq) <= np.pi)

    def test_mismatched_arrays_rejected(self):
        with pytest.raises(ValueError):
            RaySet(np.ones(2, complex), np.zeros(2), np.zeros(3))


class TestAssembleChannel:
    def test_single_ray_all_ones(self):
        cfg = ChannelModelConfig(n_tx=3, n_rx=4, n_clusters=1, rays_per_cluster=1)
        rays = RaySet(np.array([1.0 + 0j]), np.array([0.0]), np.array([0.0]))
        h = assemble_channel(rays, cfg)
        np.testing.assert_allclose(h, np.ones((4, 3)), atol=1e-15)

    def test_single_ray_rank_one(self):
        cfg = ChannelModelConfig(n_tx=8, n_rx=8, n_clusters=1, rays_per_cluster=1)
        rays = sample_rays(cfg, np.random.default_rng(1))
        s = np.linalg.svd(assemble_channel(rays, cfg), compute_uv=False)
        assert s[0] / s[1] >= 1e10

    def test_matches_brute_force_oracle(self):
        cfg = ChannelModelConfig(n_tx=5, n_rx=7, n_clusters=3, rays_per_cluster=4)
        for seed in range(5):
            rays = sample_rays(cfg, np.random.default_rng(seed))
            np.testing.assert_allclose(
                assemble_channel(rays, cfg), brute_force_channel(rays, cfg), atol=1e-12
            )

    def test_mean_frobenius_power(self):
        # E||H||_F^2 = n_rx*n_tx: each ray contributes n_rx*n_tx/(Nc*K) on average
        cfg = ChannelModelConfig()
        rng = np.random.default_rng(11)
        acc = 0.0
        n_trials = 10_000
        for _ in range(n_trials):
            acc += np.linalg.norm(assemble_channel(sample_rays(cfg, rng), cfg)) ** 2
        assert acc / n_trials == pytest.approx(16 * 16, rel=0.03)

    def test_nonfinite_rejected(self):
        cfg = ChannelModelConfig(n_clusters=1, rays_per_cluster=1)
        rays = RaySet(np.array([1.0 + 0j]), np.array([np.inf]), np.array([0.0]))
        with pytest.raises(ValueError):
            assemble_channel(rays, cfg)


class TestBeamspace:
    def test_round_trip(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
        back = from_beamspace(to_beamspace(h))
        assert np.abs(back - h).max() / np.abs(h).max() < 1e-12

    def test_on_grid_ray_is_single_spike(self):
        # evaluating the sum and transform directly: an on-grid outer
        # product of DFT columns lands in exactly one beamspace cell
        n_rx, n_tx = 16, 16
        cfg = ChannelModelConfig(n_tx=n_tx, n_rx=n_rx, n_clusters=1, rays_per_cluster=1)
        rays = RaySet(np.array([1.0 + 0j]),
                      np.array([2 * np.pi * 3 / n_rx]),
                      np.array([2 * np.pi * 5 / n_tx]))
        c = np.abs(to_beamspace(assemble_channel(rays, cfg)))
        flat = np.sort(c.ravel())
        assert flat[-1] >= 1e6 * flat[-2]

    def test_zero_maps_to_zero(self):
        assert not np.any(to_beamspace(np.zeros((4, 6))))

    def test_parseval_factor(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        c = to_beamspace(h)
        assert np.linalg.norm(h) == pytest.approx(
            np.sqrt(4 * 8) * np.linalg.norm(c), rel=1e-12
        )

    def test_dft_matrix_is_unnormalized(self):
        u = dft_matrix(4)
        assert u[0, 0] == 1.0 + 0j
        np.testing.assert_allclose(u @ u.conj().T, 4 * np.eye(4), atol=1e-12)
