"""Experiment sweeps: weight trade-off, error sensitivity, and power scaling.

Every sweep point is solved for a configurable number of channel seeds and
averaged; per-seed rows are kept alongside the aggregate so nothing is lost.
All methods are certified with the same oracles under the same (true)
uncertainty sets, regardless of what the design itself assumed.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .arraymodel import Beamformer
from .baselines import non_robust_result, svm_design
from .scenario import Scenario, SystemConfig, make_scenario
from .solver import _EVAL_STREAM, outer_loop
from .uncertainty import WorstCaseReport, evaluate_worst_case

METHODS = ("robust", "nonrobust", "svm")

CSV_COLUMNS = ("sweep", "sweep_param", "error_setting", "method",
               "worst_sum_rate", "certified_sum_rate", "worst_bp_gain",
               "utility", "iterations", "wall_time_s")
PER_SEED_COLUMNS = CSV_COLUMNS[:4] + ("seed",) + CSV_COLUMNS[4:]


@dataclass
class SweepResult:
    """Aggregate rows (one per grid point and method) plus per-seed rows."""

    sweep: str
    rows: list
    per_seed_rows: list

    def write_csv(self, path) -> None:
        _write_rows(path, CSV_COLUMNS, self.rows)

    def write_per_seed_csv(self, path) -> None:
        _write_rows(path, PER_SEED_COLUMNS, self.per_seed_rows)


def _write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])


def _format_cell(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return value


def _error_setting(config: SystemConfig) -> str:
    return f"varpi={config.varpi:g},dtheta={config.delta_theta_deg:g}"


def evaluate_design(bf: Beamformer, scenario: Scenario) -> WorstCaseReport:
    """Certify any design under the scenario's true uncertainty sets."""
    rng = np.random.default_rng([scenario.seed, _EVAL_STREAM])
    return evaluate_worst_case(bf, scenario.channels,
                               list(scenario.target_uncertainty),
                               num_samples=scenario.config.eval_samples,
                               rng=rng)


def run_method(scenario: Scenario, method: str):
    """Solve one scenario with one method.

    Returns (report, iterations, wall_time). The report is always evaluated
    against the scenario's actual uncertainty sets.
    """
    t0 = time.perf_counter()
    if method == "robust":
        res = outer_loop(scenario)
        return res.report, res.total_inner_iterations, time.perf_counter() - t0
    if method == "nonrobust":
        res = non_robust_result(scenario)
        report = evaluate_design(res.beamformer, scenario)
        return report, res.total_inner_iterations, time.perf_counter() - t0
    if method == "svm":
        bf = svm_design(scenario)
        report = evaluate_design(bf, scenario)
        return report, 0, time.perf_counter() - t0
    raise ValueError(f"unknown method {method!r}")


def _point_rows(sweep: str, param: float, config: SystemConfig,
                seeds, methods) -> tuple[list, list]:
    setting = _error_setting(config)
    per_seed = []
    for method in methods:
        for seed in seeds:
            scenario = make_scenario(config, int(seed))
            report, iters, wall = run_method(scenario, method)
            gain = report.worst_beampattern_total
            rate = report.worst_sum_rate
            per_seed.append({
                "sweep": sweep, "sweep_param": float(param),
                "error_setting": setting, "method": method, "seed": int(seed),
                "worst_sum_rate": rate,
                "certified_sum_rate": report.certified_sum_rate,
                "worst_bp_gain": gain,
                "utility": config.rho * rate + (1.0 - config.rho) * gain,
                "iterations": iters, "wall_time_s": wall,
            })
    aggregate = []
    for method in methods:
        chunk = [r for r in per_seed if r["method"] == method]
        aggregate.append({
            "sweep": sweep, "sweep_param": float(param),
            "error_setting": setting, "method": method,
            "worst_sum_rate": float(np.mean([r["worst_sum_rate"] for r in chunk])),
            "certified_sum_rate": float(np.mean([r["certified_sum_rate"] for r in chunk])),
            "worst_bp_gain": float(np.mean([r["worst_bp_gain"] for r in chunk])),
            "utility": float(np.mean([r["utility"] for r in chunk])),
            "iterations": float(np.mean([r["iterations"] for r in chunk])),
            "wall_time_s": float(np.mean([r["wall_time_s"] for r in chunk])),
        })
    return aggregate, per_seed


def _seeds(base: Scenario, num_seeds: int):
    return [base.seed + i for i in range(num_seeds)]


def sweep_rho(base: Scenario, rho_grid, num_seeds: int = 10,
              methods=METHODS) -> SweepResult:
    """Communication/sensing trade-off versus the rate weight."""
    rows, per_seed = [], []
    for rho in rho_grid:
        if not 0.0 < rho < 1.0:
            raise ValueError("rho grid must lie strictly inside (0, 1)")
        cfg = replace(base.config, rho=float(rho))
        agg, ps = _point_rows("rho", rho, cfg, _seeds(base, num_seeds), methods)
        rows += agg
        per_seed += ps
    return SweepResult("rho", rows, per_seed)


def sweep_error(base: Scenario, varpi_grid, dtheta_grid,
                num_seeds: int = 10, methods=METHODS) -> SweepResult:
    """Sensitivity to the CSI error bound and to the angle interval width.

    The CSI sweep holds the base angle width fixed and vice versa.
    """
    rows, per_seed = [], []
    for varpi in varpi_grid:
        if varpi < 0:
            raise ValueError("varpi grid must be nonnegative")
        cfg = replace(base.config, varpi=float(varpi))
        agg, ps = _point_rows("varpi", varpi, cfg, _seeds(base, num_seeds), methods)
        rows += agg
        per_seed += ps
    for dtheta in dtheta_grid:
        if dtheta < 0:
            raise ValueError("dtheta grid must be nonnegative")
        cfg = replace(base.config, delta_theta_deg=float(dtheta))
        agg, ps = _point_rows("dtheta", dtheta, cfg, _seeds(base, num_seeds), methods)
        rows += agg
        per_seed += ps
    return SweepResult("error", rows, per_seed)


POWER_ERROR_SETTINGS = ((6.0, 0.2), (10.0, 0.3))  # (dtheta_deg, varpi)


def sweep_power(base: Scenario, p0_grid_dbm, num_seeds: int = 10,
                methods=METHODS,
                error_settings=POWER_ERROR_SETTINGS) -> SweepResult:
    """Worst-case utility versus the transmit power budget, for two fixed
    error settings."""
    rows, per_seed = [], []
    for dtheta, varpi in error_settings:
        for p0 in p0_grid_dbm:
            cfg = replace(base.config, power_dbm=float(p0),
                          delta_theta_deg=float(dtheta), varpi=float(varpi))
            agg, ps = _point_rows("power_dbm", p0, cfg,
                                  _seeds(base, num_seeds), methods)
            rows += agg
            per_seed += ps
    return SweepResult("power", rows, per_seed)
