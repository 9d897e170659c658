"""Dual-robust transmit beamforming for integrated sensing and communication.

A base station array serves communication users under bounded channel-estimate
errors while keeping beampattern gain on targets whose angles are only known
to an interval. The solver maximises a weighted sum of worst-case sum rate and
worst-case beampattern gain; independent oracles certify every worst-case
quantity it reports.
"""

from .arraymodel import (ArrayGeometry, Beamformer, ChannelSet, PathLossModel,
                         beampattern_gain, steering_vector, synth_channel,
                         user_rate, user_sinr)
from .baselines import BaselineKind, non_robust_design, svm_design
from .sca import SolverIterate, mu_update
from .scenario import (ConfigError, Scenario, SystemConfig, dbm_to_watts,
                       load_config, make_scenario, watts_to_dbm)
from .solver import (OuterResult, RunConfig, SolverError, initialize,
                     inner_loop, outer_loop, solve_subproblem)
from .uncertainty import (AngleUncertainty, WorstCaseReport,
                          evaluate_worst_case, hull_samples, worst_beampattern,
                          worst_case_sinr, worst_interference,
                          worst_signal_power)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "Beamformer", "ChannelSet", "PathLossModel",
    "beampattern_gain", "steering_vector", "synth_channel", "user_rate",
    "user_sinr", "BaselineKind", "non_robust_design", "svm_design",
    "SolverIterate", "mu_update", "ConfigError", "Scenario", "SystemConfig",
    "dbm_to_watts", "load_config", "make_scenario", "watts_to_dbm",
    "OuterResult", "RunConfig", "SolverError", "initialize", "inner_loop",
    "outer_loop", "solve_subproblem", "AngleUncertainty", "WorstCaseReport",
    "evaluate_worst_case", "hull_samples", "worst_beampattern",
    "worst_case_sinr", "worst_interference", "worst_signal_power",
    "__version__",
]
