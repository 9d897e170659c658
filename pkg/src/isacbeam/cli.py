"""Command-line entry point.

Subcommands: solve, sweep-rho, sweep-error, sweep-power, oracle-check.
Each run writes CSV results plus a JSON trace named <subcommand>_<seed>.json
into --out. Exit codes: 0 success, 1 solver failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import non_robust_result, svm_design
from .oracles import run_oracle_checks
from .scenario import ConfigError, SystemConfig, load_config, make_scenario
from .solver import SolverError, outer_loop
from .sweeps import evaluate_design, sweep_error, sweep_power, sweep_rho

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacbeam",
        description="Dual-robust ISAC beamforming solver and experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config file (defaults are built in)")
        p.add_argument("--seed", type=int, default=1, help="base RNG seed")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory")

    p_solve = sub.add_parser("solve", help="solve one scenario")
    common(p_solve)
    p_solve.add_argument("--method", choices=("robust", "nonrobust", "svm"),
                         default="robust")

    p_rho = sub.add_parser("sweep-rho", help="trade-off versus the rate weight")
    common(p_rho)
    p_rho.add_argument("--grid", type=_float_list,
                       default=[round(0.1 * i, 1) for i in range(1, 10)])
    p_rho.add_argument("--num-seeds", type=int, default=10)

    p_err = sub.add_parser("sweep-error", help="sensitivity to error bounds")
    common(p_err)
    p_err.add_argument("--varpi-grid", type=_float_list,
                       default=[0.0, 0.1, 0.2, 0.3, 0.4])
    p_err.add_argument("--dtheta-grid", type=_float_list,
                       default=[0.0, 3.0, 6.0, 9.0, 12.0, 15.0])
    p_err.add_argument("--num-seeds", type=int, default=10)

    p_pow = sub.add_parser("sweep-power", help="utility versus power budget")
    common(p_pow)
    p_pow.add_argument("--grid", type=_float_list,
                       default=[20.0, 22.0, 24.0, 26.0, 28.0, 30.0])
    p_pow.add_argument("--num-seeds", type=int, default=10)

    p_orc = sub.add_parser("oracle-check",
                           help="run the derived-oracle comparisons")
    common(p_orc)
    p_orc.add_argument("--samples", type=int, default=100_000)
    p_orc.add_argument("--instances", type=int, default=20)
    return parser


def _load(args) -> SystemConfig:
    if args.config is None:
        return SystemConfig()
    return load_config(args.config)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def _cmd_solve(args) -> int:
    config = _load(args)
    scenario = make_scenario(config, args.seed)
    if args.method == "robust":
        result = outer_loop(scenario)
        report, trace = result.report, result.trace
    elif args.method == "nonrobust":
        result = non_robust_result(scenario)
        report = evaluate_design(result.beamformer, scenario)
        trace = result.trace
    else:
        bf = svm_design(scenario)
        report = evaluate_design(bf, scenario)
        trace = {"status": "solved", "total_inner_iterations": 0}

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"solve_{args.seed}.csv"
    K, M = config.num_users, config.num_targets
    header = (["method", "seed", "rho", "varpi", "delta_theta_deg",
               "power_dbm", "worst_sum_rate", "certified_sum_rate",
               "worst_bp_gain", "utility"]
              + [f"certified_sinr_{k}" for k in range(K)]
              + [f"sampled_sinr_{k}" for k in range(K)]
              + [f"worst_bp_{m}" for m in range(M)])
    gain = report.worst_beampattern_total
    utility = config.rho * report.worst_sum_rate + (1 - config.rho) * gain
    row = ([args.method, str(args.seed), _fmt(config.rho), _fmt(config.varpi),
            _fmt(config.delta_theta_deg), _fmt(config.power_dbm),
            _fmt(report.worst_sum_rate), _fmt(report.certified_sum_rate),
            _fmt(gain), _fmt(utility)]
           + [_fmt(x) for x in report.certified_sinr]
           + [_fmt(x) for x in report.sampled_sinr]
           + [_fmt(x) for x in report.worst_beampattern])
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerow(row)
    _write_json(out / f"solve_{args.seed}.json", {
        "command": "solve", "method": args.method, "seed": args.seed,
        "config": json.loads(config.to_json()), "trace": trace,
        "report": {
            "certified_sinr": report.certified_sinr.tolist(),
            "sampled_sinr": report.sampled_sinr.tolist(),
            "worst_beampattern": report.worst_beampattern.tolist(),
            "worst_sum_rate": report.worst_sum_rate,
            "certified_sum_rate": report.certified_sum_rate,
        },
    })
    print(f"wrote {csv_path}")
    return EXIT_OK


def _run_sweep(args, name: str, runner) -> int:
    config = _load(args)
    scenario = make_scenario(config, args.seed)
    result = runner(scenario)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}_{args.seed}.csv"
    result.write_csv(csv_path)
    result.write_per_seed_csv(out / f"{name}_{args.seed}_per_seed.csv")
    _write_json(out / f"{name}_{args.seed}.json", {
        "command": name, "seed": args.seed,
        "config": json.loads(config.to_json()),
        "num_rows": len(result.rows),
        "per_seed_rows": result.per_seed_rows,
    })
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    results = run_oracle_checks(seed=args.seed, instances=args.instances,
                                samples=args.samples)
    all_ok = True
    for rec in results:
        tag = "PASS" if rec["passed"] else "FAIL"
        all_ok &= rec["passed"]
        print(f"[{tag}] {rec['check']}: {rec['detail']}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_json(args.out / f"oracle-check_{args.seed}.json",
                    {"command": "oracle-check", "seed": args.seed,
                     "results": results})
    return EXIT_OK if all_ok else EXIT_SOLVER


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {args.seed}")
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep-rho":
            return _run_sweep(args, "sweep-rho", lambda sc: sweep_rho(
                sc, args.grid, num_seeds=args.num_seeds))
        if args.command == "sweep-error":
            return _run_sweep(args, "sweep-error", lambda sc: sweep_error(
                sc, args.varpi_grid, args.dtheta_grid,
                num_seeds=args.num_seeds))
        if args.command == "sweep-power":
            return _run_sweep(args, "sweep-power", lambda sc: sweep_power(
                sc, args.grid, num_seeds=args.num_seeds))
        if args.command == "oracle-check":
            return _cmd_oracle_check(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
