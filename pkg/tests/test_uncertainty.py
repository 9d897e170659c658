import numpy as np
import pytest

from isacbeam.arraymodel import ArrayGeometry, Beamformer, ChannelSet
from isacbeam.uncertainty import (AngleUncertainty, WorstCaseReport,
                                  evaluate_worst_case, hull_samples,
                                  sample_ball, sampled_max_interference,
                                  sampled_min_signal_power, worst_beampattern,
                                  worst_case_sinr, worst_interference,
                                  worst_signal_power)

GEOM8 = ArrayGeometry(8)


def rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestWorstSignalPower:
    def test_zero_radius_is_nominal(self):
        rng = np.random.default_rng(0)
        h, w = rand_complex(rng, 8), rand_complex(rng, 8)
        assert worst_signal_power(h, w, 0.0) == pytest.approx(
            abs(np.vdot(h, w)) ** 2)

    def test_large_ball_nulls_the_signal(self):
        rng = np.random.default_rng(1)
        h, w = rand_complex(rng, 8), rand_complex(rng, 8)
        eps = abs(np.vdot(h, w)) / np.linalg.norm(w) + 0.1
        assert worst_signal_power(h, w, eps) == 0.0

    def test_monotone_nonincreasing_in_eps(self):
        rng = np.random.default_rng(2)
        h, w = rand_complex(rng, 8), rand_complex(rng, 8)
        values = [worst_signal_power(h, w, e) for e in np.linspace(0, 2, 25)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_lower_bounds_samples_and_matches_polished(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            h, w = rand_complex(rng, 8), rand_complex(rng, 8)
            eps = float(rng.uniform(0.05, 0.5)) * np.linalg.norm(h)
            closed = worst_signal_power(h, w, eps)
            deltas = sample_ball(eps, 8, 2000, rng)
            realized = np.abs((h[None, :] + deltas).conj() @ w) ** 2
            assert closed <= realized.min() * (1 + 1e-9) + 1e-12
            polished = sampled_min_signal_power(h, w, eps, 20_000, rng)
            if closed > 0:
                assert polished == pytest.approx(closed, rel=5e-3)

    def test_negative_eps_rejected(self):
        with pytest.raises(ValueError):
            worst_signal_power(np.ones(4), np.ones(4), -0.1)


class TestWorstInterference:
    def test_zero_radius_is_nominal(self):
        rng = np.random.default_rng(4)
        h, Wb = rand_complex(rng, 8), rand_complex(rng, (8, 4))
        expected = np.linalg.norm(Wb.conj().T @ h) ** 2 + 0.3
        assert worst_interference(h, Wb, 0.0, 0.3) == pytest.approx(expected)

    def test_isotropic_quadratic_closed_form(self):
        # W_bar = I makes the quadratic ||h + d||^2, maximised by radial d
        rng = np.random.default_rng(5)
        h = rand_complex(rng, 8)
        eps, sigma2 = 0.7, 0.2
        expected = (np.linalg.norm(h) + eps) ** 2 + sigma2
        assert worst_interference(h, np.eye(8), eps, sigma2) == pytest.approx(
            expected, rel=1e-10)

    def test_upper_bounds_samples_and_matches_ascent(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            h, Wb = rand_complex(rng, 8), rand_complex(rng, (8, 4))
            eps = float(rng.uniform(0.05, 0.5)) * np.linalg.norm(h)
            sigma2 = float(rng.uniform(0.01, 1.0))
            exact = worst_interference(h, Wb, eps, sigma2)
            deltas = sample_ball(eps, 8, 2000, rng)
            z = h[None, :] + deltas
            realized = np.linalg.norm(z @ Wb.conj(), axis=1) ** 2 + sigma2
            assert exact >= realized.max() * (1 - 1e-9) - 1e-12
            polished = sampled_max_interference(h, Wb, eps, sigma2, 20_000, rng)
            assert exact == pytest.approx(polished, rel=5e-3)

    def test_hard_case_orthogonal_channel(self):
        # channel orthogonal to the top eigenspace: the pole vanishes and the
        # radius is spent along the top eigenvector
        rng = np.random.default_rng(7)
        Wb = rand_complex(rng, (8, 3))
        Q = Wb @ Wb.conj().T
        evals, U = np.linalg.eigh(Q)
        h = rand_complex(rng, 8)
        h = h - U[:, -1] * (U[:, -1].conj() @ h)
        eps, sigma2 = 2.0, 0.1
        exact = worst_interference(h, Wb, eps, sigma2)
        polished = sampled_max_interference(h, Wb, eps, sigma2, 50_000, rng)
        assert exact == pytest.approx(polished, rel=5e-3)
        assert exact >= polished * (1 - 1e-9)

    def test_zero_matrix_returns_noise(self):
        assert worst_interference(np.ones(8), np.zeros((8, 0)), 0.5, 0.4) == 0.4

    def test_monotone_nondecreasing_in_eps(self):
        rng = np.random.default_rng(8)
        h, Wb = rand_complex(rng, 8), rand_complex(rng, (8, 4))
        values = [worst_interference(h, Wb, e, 0.1)
                  for e in np.linspace(0, 2, 25)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestWorstCaseSinr:
    def make_channels(self, rng, eps_frac=0.3):
        h = rand_complex(rng, 8)
        return ChannelSet(h[None, :], [eps_frac * np.linalg.norm(h)], [0.5])

    def test_zero_radius_equals_nominal(self):
        rng = np.random.default_rng(9)
        h = rand_complex(rng, 8)
        channels = ChannelSet(h[None, :], [0.0], [0.5])
        bf = Beamformer(rand_complex(rng, (8, 4)))
        cert, samp = worst_case_sinr(0, bf, channels, num_samples=10, rng=rng)
        assert cert == pytest.approx(samp, rel=1e-12)

    def test_certified_below_sampled(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            channels = self.make_channels(rng)
            bf = Beamformer(rand_complex(rng, (8, 4)))
            cert, samp = worst_case_sinr(0, bf, channels, num_samples=2000,
                                         rng=rng)
            assert cert <= samp * (1 + 1e-9) + 1e-12

    def test_sampling_convergence(self):
        rng = np.random.default_rng(11)
        channels = self.make_channels(rng)
        bf = Beamformer(rand_complex(rng, (8, 4)))
        _, lo = worst_case_sinr(0, bf, channels, num_samples=100_000,
                                rng=np.random.default_rng(1))
        _, hi = worst_case_sinr(0, bf, channels, num_samples=1_000_000,
                                rng=np.random.default_rng(2))
        assert lo == pytest.approx(hi, rel=1e-2)


class TestHullSamples:
    def test_single_sample_at_midpoint(self):
        lo, hi = np.deg2rad(119.5), np.deg2rad(122.5)
        mats = hull_samples((lo, hi), 1, GEOM8)
        from isacbeam.arraymodel import steering_vector
        a = steering_vector(np.deg2rad(121.0), GEOM8)
        np.testing.assert_allclose(mats[0], np.outer(a, a.conj()), atol=1e-12)

    def test_three_samples_hit_endpoints_and_midpoint(self):
        lo, hi = 0.2, 0.6
        mats = hull_samples((lo, hi), 3, GEOM8)
        from isacbeam.arraymodel import steering_vector
        for mat, th in zip(mats, (lo, 0.4, hi)):
            a = steering_vector(th, GEOM8)
            np.testing.assert_allclose(mat, np.outer(a, a.conj()), atol=1e-12)

    def test_sample_structure(self):
        mats = hull_samples((0.1, 0.5), 7, GEOM8)
        for A in mats:
            np.testing.assert_allclose(A, A.conj().T, atol=1e-14)
            assert np.trace(A).real == pytest.approx(8.0, rel=1e-12)
            evals = np.linalg.eigvalsh(A)
            assert evals.min() >= -1e-10
            assert np.sum(evals > 1e-9) == 1  # rank one

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            hull_samples((0.5, 0.1), 3, GEOM8)

    def test_simplex_vertex_property(self):
        # a linear objective over the simplex attains its minimum at a vertex
        rng = np.random.default_rng(12)
        mats = hull_samples((0.3, 0.5), 9, GEOM8)
        W = rand_complex(rng, (8, 5))
        R = W @ W.conj().T
        traces = np.real(np.einsum("sij,ji->s", mats, R))
        vmin = traces.min()
        for _ in range(500):
            mu = rng.dirichlet(np.ones(9))
            assert mu @ traces >= vmin - 1e-12


class TestAngleUncertainty:
    def test_from_interval_uniform_weights(self):
        u = AngleUncertainty.from_interval(0.1, 0.3, 5, GEOM8)
        np.testing.assert_allclose(u.weights, 0.2)
        assert u.num_samples == 5

    def test_weight_validation(self):
        mats = hull_samples((0.1, 0.3), 3, GEOM8)
        with pytest.raises(ValueError):
            AngleUncertainty(0.1, 0.3, mats, np.array([0.5, 0.5, 0.5]))
        with pytest.raises(ValueError):
            AngleUncertainty(0.3, 0.1, mats, np.full(3, 1 / 3))

    def test_weighted_matrix(self):
        u = AngleUncertainty.from_interval(0.1, 0.3, 4, GEOM8)
        np.testing.assert_allclose(u.weighted_matrix(), u.samples.mean(axis=0),
                                   atol=1e-14)


class TestWorstBeampattern:
    def test_point_interval(self):
        rng = np.random.default_rng(13)
        bf = Beamformer(rand_complex(rng, (8, 5)))
        from isacbeam.arraymodel import beampattern_gain
        value, arg = worst_beampattern(bf, (0.7, 0.7))
        assert value == pytest.approx(beampattern_gain(bf, 0.7), rel=1e-12)
        assert arg == 0.7

    def test_flat_pattern_for_scaled_identity(self):
        bf = Beamformer(np.eye(8) * np.sqrt(0.3))
        value, _ = worst_beampattern(bf, (np.deg2rad(100), np.deg2rad(140)))
        assert value == pytest.approx(0.3 * 8, rel=1e-10)

    def test_grid_refinement_agreement(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            bf = Beamformer(rand_complex(rng, (8, 5)))
            centre = rng.uniform(np.deg2rad(40), np.deg2rad(140))
            interval = (centre - np.deg2rad(3), centre + np.deg2rad(3))
            coarse, _ = worst_beampattern(bf, interval, np.deg2rad(0.05))
            fine, _ = worst_beampattern(bf, interval, np.deg2rad(0.005))
            assert coarse == pytest.approx(fine, rel=5e-3)
            assert fine <= coarse + 1e-12  # refinement can only go lower

    def test_bad_arguments(self):
        bf = Beamformer(np.eye(8))
        with pytest.raises(ValueError):
            worst_beampattern(bf, (0.5, 0.1))
        with pytest.raises(ValueError):
            worst_beampattern(bf, (0.1, 0.5), grid_step=0.0)


class TestCertificatesNeverViolated:
    def test_sampled_points_respect_both_bounds(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            h = rand_complex(rng, 8)
            w = rand_complex(rng, 8)
            Wb = rand_complex(rng, (8, 4))
            eps = 0.3 * np.linalg.norm(h)
            sig_min = worst_signal_power(h, w, eps)
            itf_max = worst_interference(h, Wb, eps, 0.2)
            deltas = sample_ball(eps, 8, 5000, rng)
            z = h[None, :] + deltas
            sig = np.abs(z @ w.conj()) ** 2
            itf = np.linalg.norm(z @ Wb.conj(), axis=1) ** 2 + 0.2
            assert (sig >= sig_min * (1 - 1e-9) - 1e-15).all()
            assert (itf <= itf_max * (1 + 1e-9) + 1e-15).all()


class TestWorstCaseReport:
    def test_ordering_invariant_enforced(self):
        with pytest.raises(ValueError):
            WorstCaseReport(np.array([2.0]), np.array([1.0]), np.array([0.5]),
                            1.0, 1.5)
        with pytest.raises(ValueError):
            WorstCaseReport(np.array([-0.1]), np.array([1.0]), np.array([0.5]),
                            1.0, 0.5)

    def test_evaluate_worst_case_structure(self):
        rng = np.random.default_rng(16)
        h = rand_complex(rng, (2, 8))
        channels = ChannelSet(h, 0.2 * np.linalg.norm(h, axis=1), [0.3, 0.3])
        uncert = [AngleUncertainty.from_interval(0.4, 0.5, 3, GEOM8)]
        bf = Beamformer(rand_complex(rng, (8, 3)))
        report = evaluate_worst_case(bf, channels, uncert, num_samples=500,
                                     rng=rng)
        assert report.certified_sinr.shape == (2,)
        assert report.worst_beampattern.shape == (1,)
        assert report.worst_sum_rate == pytest.approx(
            np.log2(1 + report.sampled_sinr).sum())
        assert report.certified_sum_rate <= report.worst_sum_rate + 1e-9
