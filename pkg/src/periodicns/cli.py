"""Command-line surface.

Exit codes: 0 success, 1 audit or acceptance failure, 2 config error,
3 numerical blowup.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, config_to_dict, load_config
from .experiments import (
    TimeSeries,
    TrajectoryRecorder,
    _default_energy,
    _initial_field,
    assemble_audits,
    constants_for,
    run_contraction,
    run_periodic,
    run_pullback,
)
from .stepper import BlowupError, TrajectoryState, integrate
from .reporting import read_csv_series, report_paths, write_csv_series, write_json_report

EXIT_OK = 0
EXIT_AUDIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_BLOWUP = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="periodicns",
        description="Pseudo-spectral periodic 3D Navier-Stokes runs and "
                    "forcing-threshold experiments.",
    )
    parser.add_argument("--version", action="version", version=f"periodicns {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str, config_arg: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        if config_arg:
            p.add_argument("config", help="path to a YAML run configuration")
        p.add_argument("--output-dir", default=None, help="override config output_dir")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        return p

    add("constants", "print the constants report as JSON")
    p_run = add("run", "plain trajectory with audits; writes report and CSV")
    p_run.add_argument("--checkpoint-at", type=float, default=None,
                       help="stop at this time after writing a checkpoint and partial series")
    p_run.add_argument("--resume", action="store_true",
                       help="continue from the checkpoint in the output directory")
    add("contract", "two-trajectory contraction experiment")
    add("pullback", "ensemble pullback-shrinkage experiment")
    add("periodic", "periodic-orbit convergence experiment")
    add("selftest", "oracle, skew-symmetry, viscous-exactness and drift checks",
        config_arg=False)
    return parser


def _resolved(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    from dataclasses import replace

    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def _report_payload(cfg: RunConfig, body: dict) -> dict:
    return {"version": __version__, "config": config_to_dict(cfg), **body}


def _say(args: argparse.Namespace, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_constants(cfg: RunConfig, args: argparse.Namespace) -> int:
    grid = cfg.build_grid()
    forcing = cfg.build_forcing(grid)
    stepper = cfg.build_stepper()
    report = constants_for(grid, stepper, forcing, cfg.tau(grid),
                           cfg.constants.c0, cfg.constants.c_serrin)
    print(json.dumps(report.to_json_dict(), indent=2))
    return EXIT_OK


def _cmd_run(cfg: RunConfig, args: argparse.Namespace) -> int:
    grid = cfg.build_grid()
    forcing = cfg.build_forcing(grid)
    stepper = cfg.build_stepper()
    exp = cfg.experiment
    report = constants_for(grid, stepper, forcing, cfg.tau(grid),
                           cfg.constants.c0, cfg.constants.c_serrin)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = report_paths(out, "run")
    ckpt_path = out / "run_checkpoint.pns"
    partial_csv = out / "run_series_partial.csv"

    recorder = TrajectoryRecorder(forcing)
    if args.resume:
        if not ckpt_path.exists() or not partial_csv.exists():
            raise ConfigError("--resume needs run_checkpoint.pns and run_series_partial.csv "
                              f"in {out}")
        state = load_checkpoint(ckpt_path)
        header, rows = read_csv_series(partial_csv)
        if tuple(header) != TimeSeries.COLUMNS:
            raise ConfigError("partial series columns do not match")
        series = recorder.series
        for row in rows:
            for name, value in zip(TimeSeries.COLUMNS, row):
                getattr(series, "times" if name == "t" else name).append(value)
        _say(args, f"resuming from t = {state.t}")
    else:
        energy0 = exp.initial_energy if exp.initial_energy is not None else _default_energy(report)
        state = TrajectoryState(0.0, _initial_field(grid, cfg.seed, energy0))

    stop_at = args.checkpoint_at
    t_goal = exp.t_end if stop_at is None else min(stop_at, exp.t_end)
    skip_duplicate = args.resume and bool(recorder.series.times)

    def observe(s: TrajectoryState) -> None:
        nonlocal skip_duplicate
        if skip_duplicate and s.t == recorder.series.times[-1]:
            skip_duplicate = False
            return
        recorder(s)

    final = integrate(state, stepper, forcing, t_goal, observers=(observe,))

    if stop_at is not None and stop_at < exp.t_end:
        save_checkpoint(ckpt_path, final)
        write_csv_series(partial_csv, TimeSeries.COLUMNS, recorder.series.rows())
        _say(args, f"checkpoint written at t = {final.t}; rerun with --resume to finish")
        return EXIT_OK

    audits = assemble_audits(recorder.series, stepper.nu, report,
                             transient=exp.transient, n_windows=exp.n_windows)
    payload = _report_payload(cfg, {
        "constants": report.to_json_dict(),
        "audits": [a.to_json_dict() for a in audits],
        "all_passed": bool(all(a.passed for a in audits)),
        "final_time": final.t,
    })
    write_json_report(json_path, payload)
    write_csv_series(csv_path, TimeSeries.COLUMNS, recorder.series.rows())
    for a in audits:
        _say(args, f"audit {a.name}: {'pass' if a.passed else 'FAIL'} "
                   f"(worst margin {a.worst_margin:.3e})")
    return EXIT_OK if all(a.passed for a in audits) else EXIT_AUDIT_FAILURE


def _cmd_contract(cfg: RunConfig, args: argparse.Namespace) -> int:
    grid = cfg.build_grid()
    forcing = cfg.build_forcing(grid)
    stepper = cfg.build_stepper()
    exp = cfg.experiment
    fit_window = None
    if exp.fit_lo is not None and exp.fit_hi is not None:
        fit_window = (exp.fit_lo, exp.fit_hi)
    report = run_contraction(
        grid, stepper, forcing, exp.seed_a, exp.seed_b, exp.t_end,
        initial_energy=exp.initial_energy, fit_window=fit_window,
        tau=cfg.tau(grid), c0=cfg.constants.c0, c_serrin=cfg.constants.c_serrin,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = report_paths(out, "contract")
    write_json_report(json_path, _report_payload(cfg, report.to_json_dict()))
    write_csv_series(csv_path, ("t", "wsq", "dw"),
                     zip(report.times, report.wsq, report.dw))
    _say(args, f"envelope {'ok' if report.envelope_ok else 'VIOLATED'}, "
               f"monotone {'ok' if report.monotone else 'VIOLATED'}")
    ok = report.envelope_ok and report.monotone
    return EXIT_OK if ok else EXIT_AUDIT_FAILURE


def _cmd_pullback(cfg: RunConfig, args: argparse.Namespace) -> int:
    grid = cfg.build_grid()
    forcing = cfg.build_forcing(grid)
    stepper = cfg.build_stepper()
    exp = cfg.experiment
    seeds = [cfg.seed + i for i in range(exp.ensemble)]
    energies = None
    if exp.initial_energy is not None:
        energies = list(np.linspace(0.0, exp.initial_energy, exp.ensemble))
    report = run_pullback(
        grid, stepper, forcing, list(exp.start_times), seeds, exp.t_star,
        energies=energies, tau=cfg.tau(grid),
        c0=cfg.constants.c0, c_serrin=cfg.constants.c_serrin,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = report_paths(out, "pullback")
    write_json_report(json_path, _report_payload(cfg, report.to_json_dict()))
    write_csv_series(
        csv_path,
        ("start_time", "ds_diameter", "dw_diameter", "max_pair_sq", "envelope_ratio"),
        zip(report.start_times, report.ds_diameters, report.dw_diameters,
            report.max_pair_sq, report.envelope_ratio),
    )
    _say(args, f"diameters {list(report.ds_diameters)}, monotone "
               f"{'ok' if report.monotone else 'VIOLATED'}")
    return EXIT_OK if report.monotone else EXIT_AUDIT_FAILURE


def _cmd_periodic(cfg: RunConfig, args: argparse.Namespace) -> int:
    grid = cfg.build_grid()
    forcing = cfg.build_forcing(grid)
    stepper = cfg.build_stepper()
    exp = cfg.experiment
    report = run_periodic(
        grid, stepper, forcing, exp.transient, exp.n_periods, rho=exp.rho,
        comb_per_period=exp.comb_per_period, seed=cfg.seed,
        initial_energy=exp.initial_energy if exp.initial_energy is not None else 0.0,
        tau=cfg.tau(grid), c0=cfg.constants.c0, c_serrin=cfg.constants.c_serrin,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = report_paths(out, "periodic")
    write_json_report(json_path, _report_payload(cfg, report.to_json_dict()))
    write_csv_series(csv_path, ("t", "mismatch"), zip(report.times, report.mismatch))
    _say(args, f"final mismatch {report.final_mismatch:.3e}, monotone "
               f"{'ok' if report.monotone else 'VIOLATED'}")
    return EXIT_OK if report.monotone else EXIT_AUDIT_FAILURE


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, passed, value, bound in results:
        _say(args, f"{name}: {'pass' if passed else 'FAIL'} ({value:.3e} vs {bound:.1e})")
    return EXIT_OK if all(r[1] for r in results) else EXIT_AUDIT_FAILURE


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return _cmd_selftest(args)
        cfg = _resolved(load_config(args.config), args)
        handler = {
            "constants": _cmd_constants,
            "run": _cmd_run,
            "contract": _cmd_contract,
            "pullback": _cmd_pullback,
            "periodic": _cmd_periodic,
        }[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except BlowupError as exc:
        print(f"blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
