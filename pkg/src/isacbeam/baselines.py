"""Comparison designs: non-robust optimisation and steering-vector matching."""

from __future__ import annotations

from enum import Enum

from .arraymodel import Beamformer
from .scenario import Scenario, collapse_uncertainty
from .solver import OuterResult, RunConfig, outer_loop, steering_matched_start


class BaselineKind(Enum):
    NON_ROBUST = "nonrobust"
    SVM = "svm"


def svm_design(scenario: Scenario) -> Beamformer:
    """Steering-vector matching: column j aligned to the j-th estimated user
    or target angle, power split evenly; ||W||_F^2 = P0 exactly."""
    return Beamformer(steering_matched_start(scenario))


def non_robust_design(scenario: Scenario,
                      config: RunConfig | None = None) -> Beamformer:
    """The same two-layer pipeline run on point estimates (zero CSI error,
    midpoint target angles)."""
    return non_robust_result(scenario, config).beamformer


def non_robust_result(scenario: Scenario,
                      config: RunConfig | None = None) -> OuterResult:
    """Full trace variant of ``non_robust_design``; the returned report is
    evaluated under the collapsed (point-estimate) uncertainty, so re-certify
    against the original scenario for comparisons."""
    collapsed = collapse_uncertainty(scenario)
    return outer_loop(collapsed, config)
