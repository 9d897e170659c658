import numpy as np
import pytest

from isacbeam.arraymodel import (ArrayGeometry, Beamformer, PathLossModel,
                                 beampattern_gain, steering_vector,
                                 synth_channel, user_rate, user_sinr)

GEOM8 = ArrayGeometry(8)


def rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        a = steering_vector(0.0, ArrayGeometry(4))
        np.testing.assert_allclose(a, np.ones(4), atol=1e-15)

    def test_endfire_alternates_sign(self):
        a = steering_vector(np.pi / 2, ArrayGeometry(2))
        np.testing.assert_allclose(a, [1.0, -1.0], atol=1e-12)

    def test_half_sine_quarter_turns(self):
        a = steering_vector(np.pi / 6, ArrayGeometry(4))
        np.testing.assert_allclose(a, [1.0, -1j, -1.0, 1j], atol=1e-12)

    def test_unit_modulus_and_first_entry(self):
        rng = np.random.default_rng(0)
        for theta in rng.uniform(-np.pi, np.pi, 50):
            a = steering_vector(theta, GEOM8)
            assert a[0] == 1.0
            np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(1)
        for theta in rng.uniform(-np.pi, np.pi, 20):
            np.testing.assert_allclose(steering_vector(-theta, GEOM8),
                                       np.conj(steering_vector(theta, GEOM8)),
                                       atol=1e-12)

    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            ArrayGeometry(0)
        with pytest.raises(ValueError):
            ArrayGeometry(4, element_spacing_ratio=0.4)


class TestBeampattern:
    def test_identity_covariance_gives_num_antennas(self):
        bf = Beamformer(np.eye(8))
        for theta in (0.1, 0.7, 2.0):
            assert beampattern_gain(bf, theta) == pytest.approx(8.0, rel=1e-12)

    def test_single_column_coherent_gain(self):
        theta0, power = 0.9, 2.5
        a = steering_vector(theta0, GEOM8)
        bf = Beamformer((a * np.sqrt(power / 8)).reshape(-1, 1))
        assert beampattern_gain(bf, theta0) == pytest.approx(8 * power, rel=1e-12)

    def test_matches_columnwise_sum(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            W = rand_complex(rng, (8, 5))
            theta = rng.uniform(0, np.pi)
            a = steering_vector(theta, GEOM8)
            direct = sum(abs(a.conj() @ W[:, j]) ** 2 for j in range(5))
            assert beampattern_gain(Beamformer(W), theta) == pytest.approx(
                direct, rel=1e-10)

    def test_matches_trace_form(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            bf = Beamformer(rand_complex(rng, (8, 5)))
            theta = rng.uniform(0, np.pi)
            a = steering_vector(theta, GEOM8)
            A = np.outer(a, a.conj())
            trace_form = float(np.real(np.trace(A @ bf.covariance)))
            assert beampattern_gain(bf, theta) == pytest.approx(trace_form,
                                                                rel=1e-10)

    def test_invariant_under_unitary_right_multiplication(self):
        rng = np.random.default_rng(4)
        W = rand_complex(rng, (8, 5))
        for _ in range(10):
            U, _ = np.linalg.qr(rand_complex(rng, (5, 5)))
            theta = rng.uniform(0, np.pi)
            assert beampattern_gain(Beamformer(W @ U), theta) == pytest.approx(
                beampattern_gain(Beamformer(W), theta), rel=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            beampattern_gain(Beamformer(np.eye(8)), 0.3, ArrayGeometry(4))


class TestPathLoss:
    def test_reference_distance(self):
        model = PathLossModel()
        assert model.loss_db(1.0) == pytest.approx(30.0)
        assert model.gain(1.0) == pytest.approx(1e-3, rel=1e-12)

    def test_decade(self):
        assert PathLossModel().loss_db(10.0) == pytest.approx(60.0)

    def test_nonpositive_distance(self):
        with pytest.raises(ValueError):
            PathLossModel().loss_db(0.0)
        with pytest.raises(ValueError):
            synth_channel(-1.0, 0.2, PathLossModel(), GEOM8)


class TestSynthChannel:
    def test_norm_matches_gain_exactly(self):
        model = PathLossModel()
        for d in (1.0, 7.3, 50.0):
            h = synth_channel(d, 0.4, model, GEOM8)
            assert np.linalg.norm(h) ** 2 / 8 == pytest.approx(model.gain(d),
                                                               rel=1e-14)

    def test_collinear_with_steering_vector(self):
        h = synth_channel(20.0, 1.1, PathLossModel(), GEOM8)
        a = steering_vector(1.1, GEOM8)
        ratio = h / a
        np.testing.assert_allclose(ratio, ratio[0], atol=1e-15)

    def test_scattered_component_needs_rng(self):
        with pytest.raises(ValueError):
            synth_channel(20.0, 1.1, PathLossModel(), GEOM8, rician_k_db=10.0)
        rng = np.random.default_rng(5)
        h = synth_channel(20.0, 1.1, PathLossModel(), GEOM8,
                          rician_k_db=10.0, rng=rng)
        assert h.shape == (8,)


class TestUserSinr:
    def test_single_active_column(self):
        rng = np.random.default_rng(6)
        h = rand_complex(rng, 8)
        W = np.zeros((8, 5), dtype=complex)
        W[:, 2] = rand_complex(rng, 8)
        sigma2 = 0.7
        expected = abs(h.conj() @ W[:, 2]) ** 2 / sigma2
        assert user_sinr(Beamformer(W), h, 2, sigma2) == pytest.approx(expected)

    def test_orthogonal_beam_gives_zero(self):
        h = np.zeros(8, dtype=complex)
        h[0] = 1.0
        W = np.zeros((8, 3), dtype=complex)
        W[1, 0] = 1.0  # orthogonal to h
        W[2, 1] = 1.0
        W[3, 2] = 1.0
        assert user_sinr(Beamformer(W), h, 0, 1.0) == 0.0

    def test_matches_term_by_term(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            W = rand_complex(rng, (8, 5))
            h = rand_complex(rng, 8)
            sigma2 = float(rng.uniform(0.1, 2.0))
            k = int(rng.integers(0, 3))
            num = abs(h.conj() @ W[:, k]) ** 2
            den = sum(abs(h.conj() @ W[:, j]) ** 2 for j in range(5) if j != k)
            expected = num / (den + sigma2)
            assert user_sinr(Beamformer(W), h, k, sigma2) == pytest.approx(
                expected, rel=1e-10)

    def test_scale_consistency(self):
        rng = np.random.default_rng(8)
        W = rand_complex(rng, (8, 5))
        h = rand_complex(rng, 8)
        base = user_sinr(Beamformer(W), h, 1, 0.0)
        scaled = user_sinr(Beamformer(np.sqrt(3.0) * W), h, 1, 0.0)
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_rate_definition(self):
        rng = np.random.default_rng(9)
        W = rand_complex(rng, (8, 5))
        h = rand_complex(rng, 8)
        bf = Beamformer(W)
        assert user_rate(bf, h, 0, 0.5) == pytest.approx(
            np.log2(1 + user_sinr(bf, h, 0, 0.5)))

    def test_index_out_of_range(self):
        bf = Beamformer(np.eye(8))
        with pytest.raises(IndexError):
            user_sinr(bf, np.ones(8), 8, 1.0)


class TestBeamformerType:
    def test_power_and_validation(self):
        W = np.eye(8) * 0.5
        bf = Beamformer(W)
        assert bf.power == pytest.approx(2.0)
        bf.validate_power(2.0)
        with pytest.raises(ValueError):
            bf.validate_power(1.9)

    def test_covariance_hermitian_psd(self):
        rng = np.random.default_rng(10)
        R = Beamformer(rand_complex(rng, (8, 5))).covariance
        np.testing.assert_allclose(R, R.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(R).min() >= -1e-12
