import dataclasses

import numpy as np
import pytest

from isacbeam.arraymodel import beampattern_gain, steering_vector, user_rate
from isacbeam.baselines import (BaselineKind, non_robust_design,
                                non_robust_result, svm_design)
from isacbeam.scenario import SystemConfig, make_scenario
from isacbeam.solver import outer_loop


@pytest.fixture(scope="module")
def scenario():
    return make_scenario(SystemConfig(), seed=4)


class TestSvmDesign:
    def test_power_budget_exact(self, scenario):
        bf = svm_design(scenario)
        assert bf.power == pytest.approx(scenario.config.power_budget,
                                         rel=1e-12)

    def test_columns_proportional_to_steering_vectors(self, scenario):
        bf = svm_design(scenario)
        angles = np.concatenate([scenario.user_angles, scenario.target_angles])
        for j, theta in enumerate(angles):
            a = steering_vector(theta, scenario.geometry)
            ratio = bf.matrix[:, j] / a
            np.testing.assert_allclose(ratio, ratio[0], atol=1e-14)

    def test_own_angle_coherent_gain(self, scenario):
        # one column's contribution at its own angle is N_t*P0/(K+M)
        bf = svm_design(scenario)
        P0 = scenario.config.power_budget
        KM = scenario.num_streams
        Nt = scenario.config.num_antennas
        for m, theta in enumerate(scenario.target_angles):
            col = bf.matrix[:, scenario.num_users + m]
            a = steering_vector(theta, scenario.geometry)
            contribution = abs(a.conj() @ col) ** 2
            assert contribution == pytest.approx(Nt * P0 / KM, rel=1e-12)

    def test_single_user_is_matched_filter(self):
        cfg = SystemConfig(num_users=1, num_targets=0,
                           user_angles_deg=(37.0,), target_angles_deg=())
        sc = make_scenario(cfg, seed=1)
        bf = svm_design(sc)
        h = sc.channels.estimates[0]
        # collinear with the channel: rate equals matched-filter capacity
        rate = user_rate(bf, h, 0, cfg.noise_power)
        capacity = np.log2(1 + cfg.power_budget * np.linalg.norm(h) ** 2
                           / cfg.noise_power)
        assert rate == pytest.approx(capacity, rel=1e-12)


class TestNonRobustDesign:
    def test_power_within_budget(self, scenario):
        bf = non_robust_design(scenario)
        assert bf.power <= scenario.config.power_budget * (1 + 1e-6)

    def test_collapsed_uncertainty_matches_robust(self):
        # with no error at all, robust and non-robust are the same problem
        cfg = SystemConfig(varpi=0.0, delta_theta_deg=0.0)
        sc = make_scenario(cfg, seed=2)
        robust = outer_loop(sc)
        nonrobust = non_robust_result(sc)
        assert nonrobust.objective == pytest.approx(robust.objective, rel=1e-2)

    def test_nominal_rate_at_least_robust(self, scenario):
        # the non-robust design optimises the estimated channels exactly
        robust = outer_loop(scenario)
        nonrobust = non_robust_result(scenario)
        sigma2 = scenario.config.noise_power

        def nominal_sum_rate(bf):
            return sum(user_rate(bf, scenario.channels.estimates[k], k, sigma2)
                       for k in range(scenario.num_users))

        assert nominal_sum_rate(nonrobust.beamformer) >= nominal_sum_rate(
            robust.beamformer) - 1e-2


class TestBaselineKind:
    def test_enum_values(self):
        assert {k.value for k in BaselineKind} == {"nonrobust", "svm"}
