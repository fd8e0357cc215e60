"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..integrators import SYSTEMS, STEPPERS, PhaseState, energy_drift, integrate, write_trajectory_csv
from ..mlp import save_params
from ..optimizer import write_energy_trace
from ..pipeline.dataset import DataError, write_csv
from ..pipeline.synthetic import synthesize_credit_data
from .config import ConfigError, ExperimentConfig, default_config, parse_config
from .protocol import StageError, run_benchmark, run_grid, run_single, score_external
from .report import export_report

log = logging.getLogger("hamcredit")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else default_config()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        overrides["data.synthetic.horizon_months"] = args.horizon
    if getattr(args, "optimizer", None) is not None:
        overrides["optimizer.kind"] = "sgd_momentum" if args.optimizer == "sgd" else "symplectic"
    return cfg.with_overrides(overrides) if overrides else cfg


def _write_run_outputs(out: Path, report, result) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if result is not None:
        write_energy_trace(result.energy_trace, out / "energy_trace.csv")
        save_params(result.params, out / "params.txt")
        # relative names keep report.json identical across output directories
        report.energy_trace = "energy_trace.csv"
        report.params_snapshot = "params.txt"
    export_report(report, out / "report.json", "json")
    export_report(report, out / "summary.csv", "csv-summary")
    (out / "timing.json").write_text(json.dumps({"wall_clock_seconds": report.wall_clock_seconds}) + "\n")


def cmd_generate(args) -> None:
    cfg = _load_config(args)
    ds = synthesize_credit_data(cfg.generator_config())
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(ds, args.out / "data.csv")
    log.info("wrote %d rows (default rate %.4f) to %s", len(ds), ds.default_rate(), args.out / "data.csv")


def cmd_train(args) -> None:
    report, result = run_single(_load_config(args))
    _write_run_outputs(args.out, report, result)
    log.info("validation AUC %.4f, OOT AUC %.4f", report.validation.auc, report.oot.auc)


def cmd_grid(args) -> None:
    cfg = _load_config(args)
    if not cfg.grid_axes():
        raise ConfigError(["grid: at least one grid axis must be non-empty for grid mode"])
    report, _ = run_grid(cfg)
    _write_run_outputs(args.out, report, None)
    log.info("best cell %s (mean fold AUC %.4f)", report.best_cell, report.aggregate.auc)


def cmd_benchmark(args) -> None:
    report, result = run_benchmark(_load_config(args))
    _write_run_outputs(args.out, report, result)
    log.info("CV AUC %.4f +- %.4f, validation AUC %.4f, OOT AUC %.4f",
             report.aggregate.auc, report.aggregate.std["auc"], report.validation.auc, report.oot.auc)


def cmd_score_external(args) -> None:
    report = score_external(args.predictions, args.labels, args.threshold)
    args.out.mkdir(parents=True, exist_ok=True)
    export_report(report, args.out / "report.json", "json")
    export_report(report, args.out / "summary.csv", "csv-summary")
    log.info("external AUC %.4f over %d rows", report.auc, report.n)


def cmd_integrate(args) -> None:
    system = SYSTEMS[args.system]()
    s0 = PhaseState([args.q0], [args.p0])
    args.out.mkdir(parents=True, exist_ok=True)
    summary = {}
    methods = list(STEPPERS) if args.method == "all" else [args.method]
    for method in methods:
        traj = integrate(system, s0, args.dt, args.steps, method)
        write_trajectory_csv(traj, args.out / f"trajectory_{method}.csv")
        max_dev, slope = energy_drift(traj)
        summary[method] = {"max_abs_energy_deviation": max_dev, "energy_drift_slope": slope}
        log.info("%-16s max|H-H0| = %.3e  slope = %.3e", method, max_dev, slope)
    (args.out / "integrate.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamcredit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, horizon=True, optimizer=True):
        p.add_argument("--config", type=Path, help="TOML experiment config (default: built-in)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        if horizon:
            p.add_argument("--horizon", type=int, choices=(12, 36, 60), help="synthetic performance window")
        if optimizer:
            p.add_argument("--optimizer", choices=("symplectic", "sgd"), help="update rule")

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    common(p, optimizer=False)
    p.set_defaults(func=cmd_generate)

    for name, func, text in (("train", cmd_train, "single training run"),
                             ("grid", cmd_grid, "grid search over temporal CV"),
                             ("benchmark", cmd_benchmark, "full out-of-time protocol")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("score-external", help="score another model's prediction file")
    p.add_argument("--predictions", type=Path, required=True, help="CSV with columns id, score")
    p.add_argument("--labels", type=Path, required=True, help="CSV with columns id, label")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_score_external)

    p = sub.add_parser("integrate", help="run the reference integrators")
    p.add_argument("--system", choices=sorted(SYSTEMS), default="oscillator")
    p.add_argument("--method", choices=[*STEPPERS, "all"], default="all")
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--q0", type=float, default=1.0)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; those are invalid input here
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        args.func(args)
    except (ConfigError, DataError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except StageError as exc:
        log.error("%s", exc)
        invalid = isinstance(exc.cause, (ConfigError, DataError, ValueError))
        return EXIT_INVALID if invalid else EXIT_RUNTIME
    except (ValueError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.exception("runtime failure: %s", exc)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
