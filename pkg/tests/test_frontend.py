"""Front end: SNR mapping, QPSK training, one-bit quantizer, receive chain."""

import numpy as np
import pytest

from onebit_jce.channel import array_response
from onebit_jce.frontend import (
    CfoParams,
    gen_training,
    quantize_onebit,
    simulate_rx,
    snr_to_radius,
)


class TestSnrToRadius:
    def test_zero_db_single_antenna(self):
        assert snr_to_radius(0.0, 1) == pytest.approx(1.0)

    def test_radius_one_at_matched_snr(self):
        # 10*log10(16) dB with 16 antennas gives r = 1
        assert snr_to_radius(10 * np.log10(16), 16) == pytest.approx(1.0, abs=1e-12)

    def test_zero_db_sixteen_antennas(self):
        assert snr_to_radius(0.0, 16) == pytest.approx(0.25)

    def test_inverse_of_snr_definition(self):
        for snr in (-10.0, -3.0, 7.5):
            r = snr_to_radius(snr, 16)
            assert 10 * np.log10(16 * r * r) == pytest.approx(snr, abs=1e-12)


class TestGenTraining:
    def test_magnitudes_equal_radius(self):
        t = gen_training(16, 64, 0.37, np.random.default_rng(0))
        np.testing.assert_allclose(np.abs(t), 0.37, atol=1e-15)

    def test_shape(self):
        assert gen_training(16, 64, 1.0, np.random.default_rng(0)).shape == (16, 64)

    def test_phases_on_diagonal_constellation(self):
        t = gen_training(8, 32, 1.0, np.random.default_rng(1))
        phases = np.angle(t) % (2 * np.pi)
        expected = np.pi / 4 + np.pi / 2 * np.arange(4)
        dist = np.min(np.abs(phases[..., None] - expected), axis=-1)
        assert dist.max() < 1e-12

    def test_symbols_uniform(self):
        # 1e5 draws; each symbol frequency within 1% of 1/4
        t = gen_training(100, 1000, 1.0, np.random.default_rng(123))
        phases = np.angle(t)
        counts = np.array([
            np.sum((phases > 0) & (phases < np.pi / 2)),
            np.sum((phases > np.pi / 2) & (phases < np.pi)),
            np.sum((phases > -np.pi) & (phases < -np.pi / 2)),
            np.sum((phases > -np.pi / 2) & (phases < 0)),
        ])
        assert counts.sum() == t.size
        np.testing.assert_allclose(counts / t.size, 0.25, atol=0.0025)

    def test_bad_args_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            gen_training(4, 0, 1.0, rng)
        with pytest.raises(ValueError):
            gen_training(4, 8, 0.0, rng)


class TestQuantizer:
    def test_sign_of_parts(self):
        assert quantize_onebit(np.array([0.5 - 1.2j]))[0] == 1 - 1j

    def test_sign_zero_is_plus_one(self):
        assert quantize_onebit(np.array([-3 + 0j]))[0] == -1 + 1j

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        q = quantize_onebit(x)
        np.testing.assert_array_equal(quantize_onebit(q), q)

    def test_outputs_in_qpsk_corners(self):
        rng = np.random.default_rng(6)
        q = quantize_onebit(rng.standard_normal(100) + 1j * rng.standard_normal(100))
        assert set(np.unique(q.real)) <= {-1.0, 1.0}
        assert set(np.unique(q.imag)) <= {-1.0, 1.0}

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            quantize_onebit(np.array([np.nan + 1j]))


class TestSimulateRx:
    @pytest.fixture
    def small_system(self):
        rng = np.random.default_rng(9)
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        t = gen_training(2, 4, 1.0, rng)
        return h, t

    def test_zero_cfo_noiseless_is_ht(self, small_system):
        h, t = small_system
        y = simulate_rx(h, t, CfoParams(0.0), quantize=False, add_noise=False)
        np.testing.assert_allclose(y, h @ t, atol=1e-14)

    def test_pi_cfo_alternates_columns(self, small_system):
        h, t = small_system
        y = simulate_rx(h, t, CfoParams(np.pi), quantize=False, add_noise=False)
        ht = h @ t
        signs = (-1.0) ** np.arange(t.shape[1])
        np.testing.assert_allclose(y, ht * signs, atol=1e-12)

    def test_matches_per_column_oracle(self, small_system):
        # direct per-column evaluation of the receive equation
        h, t = small_system
        omega = 0.83
        y = simulate_rx(h, t, CfoParams(omega), quantize=False, add_noise=False)
        for n in range(t.shape[1]):
            np.testing.assert_allclose(
                y[:, n], np.exp(1j * omega * n) * (h @ t[:, n]), atol=1e-13
            )

    def test_block_equals_diag_form(self, small_system):
        h, t = small_system
        omega = 1.7
        y = simulate_rx(h, t, CfoParams(omega), quantize=False, add_noise=False)
        d = np.diag(array_response(t.shape[1], omega))
        np.testing.assert_allclose(y, h @ t @ d, atol=1e-13)

    def test_noise_variance_unit(self):
        # empirical complex variance of the additive noise over 1e6 samples
        h = np.zeros((1000, 1), dtype=complex)
        t = np.full((1, 1000), 1e-30 + 0j)
        y = simulate_rx(h, t, CfoParams(0.0), np.random.default_rng(2024),
                        quantize=False, add_noise=True)
        assert np.mean(np.abs(y) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_quantized_entries_valid(self, small_system):
        h, t = small_system
        y = simulate_rx(h, t, CfoParams(0.4), np.random.default_rng(1), quantize=True)
        assert np.all(np.abs(y.real) == 1.0) and np.all(np.abs(y.imag) == 1.0)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            simulate_rx(np.zeros((2, 3), complex), np.zeros((2, 4), complex),
                        CfoParams(0.0), np.random.default_rng(0))

    def test_missing_rng_rejected(self, small_system):
        h, t = small_system
        with pytest.raises(ValueError):
            simulate_rx(h, t, CfoParams(0.0), rng=None, add_noise=True)


class TestCfoParams:
    def test_wraps_to_principal_range(self):
        assert CfoParams(2 * np.pi + 0.3).omega_e == pytest.approx(0.3)
        assert CfoParams(-0.3).omega_e == pytest.approx(2 * np.pi - 0.3)

    def test_from_offset_hz(self):
        # 2*pi*delta_f*T
        p = CfoParams.from_offset_hz(109.375e3, 0.5e-6)
        assert p.omega_e == pytest.approx(2 * np.pi * 109375 * 0.5e-6, rel=1e-12)
