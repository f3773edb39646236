"""Command-line front end: calibrate, run, sweep, compare, and audits.

Commands
--------
``calibrate``
    Simulate a signal-off counting run and solve for the selection
    geometry (p-hat, r-hat, delta-hat, h-hat). JSON output.
``run``
    Simulate counting runs at the configured signal phases and estimate
    each phase. CSV + JSON summary + figure.
``sweep``
    Trace the amplification curve kappa(theta) over a phase grid.
``compare``
    Amplified vs conventional readout over a seed list at a shared
    photon budget.
``reproduce-fig2``
    The standard dataset: kappa vs theta for several magnifications.
``train-check``
    Audit that the bench model (waveplates, displacers, retarders)
    reproduces the abstract protocol over a (delta, theta) grid.

All outputs go to the configured directory under fixed names. CSV files
carry ``#``-prefixed header comments (command line, resolved config as
one-line JSON, units) above the column header; reruns with the same
configuration and seeds produce byte-identical CSV bodies. Report
commands also render a PNG figure next to the data unless ``--no-plot``
is given.

Exit status: 0 on success, 2 on configuration/validation errors, 3 on
domain errors (degenerate states, insufficient data, ...); the error
category is printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
import csv
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from wmpa.config import (
    DEFAULT_MODE,
    RunConfig,
    load_settings,
    resolve_run_config,
)
from wmpa.errors import (
    ConfigError,
    InsufficientDataError,
    ValidationError,
    WmpaError,
)
from wmpa.estimation import (
    COMPARISON_MODES,
    CalibrationResult,
    calibrate_r,
    calibration_from_r,
    compare_protocols,
    estimate_phase,
    kappa_from_counts,
)
from wmpa.montecarlo import simulate_counts
from wmpa.optics import OpticalTrain, build_figure1_train, check_protocol_equivalence
from wmpa.protocol import ProtocolConfig, amplified_phase_exact

__all__ = ["main", "build_parser"]

UNITS_NOTE = (
    "delta in degrees; theta and kappa in radians; "
    "rate in counts/s; duration in seconds"
)

_CALIBRATION_KEYS = ("p_hat", "r_hat", "delta_hat", "h_hat", "std_error_p")


# ---------------------------------------------------------------------------
# Output helpers


def _jsonable(obj: Any) -> Any:
    """Plain JSON types only; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _fmt_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(
    path: Path,
    fieldnames: Sequence[str],
    rows: Iterable[dict],
    command: str,
    config_echo: dict,
) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# command: {command}\n")
        fh.write(f"# config: {json.dumps(_jsonable(config_echo), sort_keys=True)}\n")
        fh.write(f"# units: {UNITS_NOTE}\n")
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_cell(v) for k, v in row.items()})
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def _mean(values) -> float:
    return float(np.mean(np.asarray(values, dtype=float)))


def _std(values) -> float:
    arr = np.asarray(values, dtype=float)
    return float(np.std(arr, ddof=1)) if arr.size > 1 else math.nan


def _group_rows(rows: list[dict], key: str) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(row[key], []).append(row)
    return groups


# ---------------------------------------------------------------------------
# Configuration plumbing


def _resolve(args: argparse.Namespace, default_seed_count: int) -> RunConfig:
    settings = load_settings(args.config) if args.config else {}
    overrides = {
        "delta_deg": args.delta,
        "thetas": tuple(args.theta) if args.theta else None,
        "rate": args.rate,
        "duration": args.duration,
        "visibility": args.visibility,
        "lcvr_jitter_std": args.lcvr_jitter_std,
        "dark_rate": args.dark_rate,
        "seed_start": args.seed,
        "seed_count": args.n_seeds,
        "out": str(args.out) if args.out is not None else None,
        "mode": getattr(args, "mode", None),
    }
    return resolve_run_config(settings, overrides, default_seed_count=default_seed_count)


def _prepare_out(config: RunConfig) -> Path:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    return config.out_dir


def _command_line(argv: Sequence[str]) -> str:
    return shlex.join(["wmpa", *argv])


def _load_calibration_file(path: Path) -> CalibrationResult:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read calibration file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"calibration file {path} must hold a JSON object")
    missing = [k for k in _CALIBRATION_KEYS if k not in doc]
    if missing:
        raise ConfigError(f"calibration file {path} is missing fields {missing}")
    values = {}
    for key in _CALIBRATION_KEYS:
        raw = doc[key]
        try:
            values[key] = float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"calibration file {path}: field {key} is not a number: {raw!r}"
            ) from exc
    return CalibrationResult(**values)


def _calibration_for(config: RunConfig, args: argparse.Namespace) -> CalibrationResult:
    calibration_path = getattr(args, "calibration", None)
    if calibration_path is not None:
        return _load_calibration_file(calibration_path)
    return config.exact_calibration()


# ---------------------------------------------------------------------------
# Commands


def cmd_calibrate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=1)
    config.require_geometry()
    out = _prepare_out(config)
    cfg0 = config.protocol_config(0.0)
    counts = simulate_counts(
        cfg0, config.noise, config.rate, config.duration, config.seeds[0]
    )
    if counts.n_input <= 0:
        raise InsufficientDataError(
            "no photons entered the bench during the calibration window"
        )
    p_hat = counts.n_detected / counts.n_input
    cal = calibrate_r(p_hat, counts.n_input)
    margin = 2.0 * cal.std_error_r if math.isfinite(cal.std_error_r) else 0.0
    if cal.r_hat + margin >= 0.0:
        print(
            "warning: calibration cannot exclude r_hat >= 0 (no amplification, "
            "h_hat <= 1); the post-selection offset is at or beyond the "
            "22.5 degree boundary",
            file=sys.stderr,
        )
    payload = {
        "p_hat": cal.p_hat,
        "r_hat": cal.r_hat,
        "delta_hat": cal.delta_hat,
        "h_hat": cal.h_hat,
        "std_error_p": cal.std_error_p,
        "n_input": counts.n_input,
        "n_detected": counts.n_detected,
        "seed": counts.seed,
        "config": config.to_dict(),
    }
    path = _write_json(out / "calibration.json", payload)
    print(f"p_hat       = {cal.p_hat!r} +/- {cal.std_error_p!r}")
    print(f"r_hat       = {cal.r_hat!r}")
    print(f"delta_hat   = {cal.delta_hat!r} deg")
    print(f"h_hat       = {cal.h_hat!r}")
    print(f"wrote {path}")
    return 0


_RUN_FIELDS = (
    "theta_true",
    "seed",
    "n_input",
    "n_detected",
    "sigma_x_hat",
    "kappa_hat",
    "theta_hat",
    "theta_err",
    "analytic_sensitivity",
    "clamped",
)


def cmd_run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=1)
    config.require_geometry()
    out = _prepare_out(config)
    cal = _calibration_for(config, args)
    rows = []
    for theta in config.thetas:
        cfg = config.protocol_config(theta)
        for seed in config.seeds:
            counts = simulate_counts(
                cfg, config.noise, config.rate, config.duration, seed
            )
            est = estimate_phase(counts, cal, config.noise)
            rows.append(
                {
                    "theta_true": theta,
                    "seed": seed,
                    "n_input": counts.n_input,
                    "n_detected": counts.n_detected,
                    "sigma_x_hat": est.sigma_x_hat,
                    "kappa_hat": est.kappa_hat,
                    "theta_hat": est.theta_hat,
                    "theta_err": est.std_error_theta,
                    "analytic_sensitivity": est.analytic_sensitivity,
                    "clamped": est.clamped,
                }
            )
    command = _command_line(argv)
    csv_path = _write_csv(out / "runs.csv", _RUN_FIELDS, rows, command, config.to_dict())
    per_theta = []
    for theta, group in _group_rows(rows, "theta_true").items():
        per_theta.append(
            {
                "theta_true": theta,
                "n_runs": len(group),
                "mean_theta_hat": _mean([r["theta_hat"] for r in group]),
                "std_theta_hat": _std([r["theta_hat"] for r in group]),
                "mean_theta_err": _mean([r["theta_err"] for r in group]),
                "mean_analytic_sensitivity": _mean(
                    [r["analytic_sensitivity"] for r in group]
                ),
                "clamped_runs": sum(bool(r["clamped"]) for r in group),
            }
        )
    summary = {
        "command": command,
        "config": config.to_dict(),
        "calibration": {k: getattr(cal, k) for k in _CALIBRATION_KEYS},
        "per_theta": per_theta,
    }
    summary_path = _write_json(out / "runs_summary.json", summary)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    for entry in per_theta:
        print(
            f"theta = {entry['theta_true']:.6g}: "
            f"theta_hat = {entry['mean_theta_hat']:.6g} "
            f"(mean err {entry['mean_theta_err']:.3g}, {entry['n_runs']} runs)"
        )
    if not args.no_plot:
        from wmpa.plots import save_estimates_plot

        plot_path = save_estimates_plot(
            out / "runs.png",
            [r["theta_true"] for r in rows],
            [r["theta_hat"] for r in rows],
            [r["theta_err"] for r in rows],
        )
        print(f"wrote {plot_path}")
    return 0


_SWEEP_FIELDS = (
    "theta_true",
    "kappa_theory",
    "seed",
    "n_detected",
    "kappa_hat",
    "kappa_err",
    "clamped",
)


def cmd_sweep(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=5)
    config.require_geometry()
    out = _prepare_out(config)
    cal = _calibration_for(config, args)
    if args.theta:
        grid = list(config.thetas)
    else:
        if not (
            math.isfinite(args.theta_min)
            and math.isfinite(args.theta_max)
            and args.theta_min < args.theta_max
        ):
            raise ConfigError(
                f"sweep needs theta-min < theta-max, got "
                f"{args.theta_min!r} .. {args.theta_max!r}"
            )
        if args.points < 2:
            raise ConfigError(f"sweep needs at least 2 points, got {args.points!r}")
        grid = [float(t) for t in np.linspace(args.theta_min, args.theta_max, args.points)]
    rows = []
    for theta in grid:
        cfg = config.protocol_config(theta)
        kappa_theory = amplified_phase_exact(theta, cal.r_hat)
        for seed in config.seeds:
            counts = simulate_counts(
                cfg, config.noise, config.rate, config.duration, seed
            )
            kappa_hat, kappa_err, clamped = kappa_from_counts(
                counts, config.noise.visibility
            )
            rows.append(
                {
                    "theta_true": theta,
                    "kappa_theory": kappa_theory,
                    "seed": seed,
                    "n_detected": counts.n_detected,
                    "kappa_hat": kappa_hat,
                    "kappa_err": kappa_err,
                    "clamped": clamped,
                }
            )
    command = _command_line(argv)
    csv_path = _write_csv(
        out / "sweep.csv", _SWEEP_FIELDS, rows, command, config.to_dict()
    )
    per_theta = []
    for theta, group in _group_rows(rows, "theta_true").items():
        per_theta.append(
            {
                "theta_true": theta,
                "kappa_theory": group[0]["kappa_theory"],
                "mean_kappa_hat": _mean([r["kappa_hat"] for r in group]),
                "std_kappa_hat": _std([r["kappa_hat"] for r in group]),
                "mean_kappa_err": _mean([r["kappa_err"] for r in group]),
                "n_runs": len(group),
            }
        )
    summary = {
        "command": command,
        "config": config.to_dict(),
        "calibration": {k: getattr(cal, k) for k in _CALIBRATION_KEYS},
        "per_theta": per_theta,
    }
    summary_path = _write_json(out / "sweep_summary.json", summary)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    if not args.no_plot:
        from wmpa.plots import save_amplification_plot

        theory_theta = np.linspace(min(0.0, grid[0]), grid[-1], 200)
        point_err = [
            e["std_kappa_hat"]
            if math.isfinite(e["std_kappa_hat"])
            else e["mean_kappa_err"]
            for e in per_theta
        ]
        plot_path = save_amplification_plot(
            out / "sweep.png",
            [
                {
                    "label": f"h = {cal.h_hat:.4g}",
                    "theory_theta": theory_theta,
                    "theory_kappa": [
                        amplified_phase_exact(t, cal.r_hat) for t in theory_theta
                    ],
                    "point_theta": [e["theta_true"] for e in per_theta],
                    "point_kappa": [e["mean_kappa_hat"] for e in per_theta],
                    "point_err": point_err,
                }
            ],
        )
        print(f"wrote {plot_path}")
    return 0


_COMPARE_FIELDS = (
    "theta_true",
    "seed",
    "n_input",
    "n_detected",
    "theta_hat_amplified",
    "theta_err_amplified",
    "clamped_amplified",
    "n_conventional",
    "theta_hat_conventional",
    "theta_err_conventional",
    "clamped_conventional",
)


def cmd_compare(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=100)
    config.require_geometry()
    out = _prepare_out(config)
    if len(config.seeds) < 2:
        raise ConfigError(
            "compare needs at least two seeds to measure empirical spreads"
        )
    cal = _calibration_for(config, args)
    reports = [
        compare_protocols(
            theta, cal, config.budget, config.noise, list(config.seeds), config.mode
        )
        for theta in config.thetas
    ]
    rows = []
    for report in reports:
        for row in report.rows:
            rows.append(
                {
                    "theta_true": report.theta_true,
                    "seed": row.seed,
                    "n_input": row.n_input,
                    "n_detected": row.amplified.n_detected,
                    "theta_hat_amplified": row.amplified.theta_hat,
                    "theta_err_amplified": row.amplified.std_error_theta,
                    "clamped_amplified": row.amplified.clamped,
                    "n_conventional": row.n_conventional,
                    "theta_hat_conventional": row.conventional.theta_hat,
                    "theta_err_conventional": row.conventional.std_error_theta,
                    "clamped_conventional": row.conventional.clamped,
                }
            )
    command = _command_line(argv)
    csv_path = _write_csv(
        out / "compare.csv", _COMPARE_FIELDS, rows, command, config.to_dict()
    )
    summary = {
        "command": command,
        "config": config.to_dict(),
        "calibration": {k: getattr(cal, k) for k in _CALIBRATION_KEYS},
        "per_theta": [report.summary() for report in reports],
    }
    summary_path = _write_json(out / "compare_summary.json", summary)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    for report in reports:
        print(
            f"theta = {report.theta_true:.6g}: empirical std ratio "
            f"(conventional/amplified) = {report.std_ratio:.4g} "
            f"[mode {report.mode}, h_hat = {cal.h_hat:.4g}]"
        )
    if not args.no_plot:
        from wmpa.plots import save_comparison_plot

        first = reports[0]
        plot_path = save_comparison_plot(
            out / "compare.png",
            [row.amplified.theta_hat for row in first.rows],
            [row.conventional.theta_hat for row in first.rows],
            first.theta_true,
        )
        print(f"wrote {plot_path}")
    return 0


_FIG2_FIELDS = (
    "h",
    "r",
    "theta_true",
    "kappa_theory",
    "kappa_hat",
    "kappa_err",
    "theta_hat",
    "theta_err",
    "seed",
)


def cmd_reproduce_fig2(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=100)
    out = _prepare_out(config)
    h_list = [float(h) for h in (args.h or (3.0, 5.0, 10.0))]
    for h in h_list:
        if not math.isfinite(h) or h <= 0.5:
            raise ConfigError(
                f"magnification h must exceed 0.5 (so that |r| = |1/h - 1| < 1), got {h!r}"
            )
    rows = []
    per_point = []
    series = []
    for h in h_list:
        cal = calibration_from_r(1.0 / h - 1.0)
        point_means = []
        point_stds = []
        for theta in config.thetas:
            cfg = ProtocolConfig.from_postselection_angle(cal.delta_hat, theta)
            kappa_theory = amplified_phase_exact(theta, cal.r_hat)
            kappa_hats = []
            for seed in config.seeds:
                counts = simulate_counts(
                    cfg, config.noise, config.rate, config.duration, seed
                )
                kappa_hat, kappa_err, _ = kappa_from_counts(
                    counts, config.noise.visibility
                )
                est = estimate_phase(counts, cal, config.noise)
                kappa_hats.append(kappa_hat)
                rows.append(
                    {
                        "h": h,
                        "r": cal.r_hat,
                        "theta_true": theta,
                        "kappa_theory": kappa_theory,
                        "kappa_hat": kappa_hat,
                        "kappa_err": kappa_err,
                        "theta_hat": est.theta_hat,
                        "theta_err": est.std_error_theta,
                        "seed": seed,
                    }
                )
            per_point.append(
                {
                    "h": h,
                    "r": cal.r_hat,
                    "theta_true": theta,
                    "kappa_theory": kappa_theory,
                    "mean_kappa_hat": _mean(kappa_hats),
                    "std_kappa_hat": _std(kappa_hats),
                    "n_seeds": len(config.seeds),
                }
            )
            point_means.append(_mean(kappa_hats))
            point_stds.append(_std(kappa_hats))
        theory_theta = np.linspace(0.0, 1.05 * max(config.thetas), 200)
        series.append(
            {
                "label": f"h = {h:g}",
                "theory_theta": theory_theta,
                "theory_kappa": [
                    amplified_phase_exact(t, cal.r_hat) for t in theory_theta
                ],
                "point_theta": list(config.thetas),
                "point_kappa": point_means,
                "point_err": point_stds,
            }
        )
    command = _command_line(argv)
    csv_path = _write_csv(
        out / "fig2.csv", _FIG2_FIELDS, rows, command, config.to_dict()
    )
    summary = {
        "command": command,
        "config": config.to_dict(),
        "magnifications": h_list,
        "per_point": per_point,
    }
    summary_path = _write_json(out / "fig2_summary.json", summary)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    for entry in per_point:
        print(
            f"h = {entry['h']:g}, theta = {entry['theta_true']:.6g}: "
            f"kappa_hat = {entry['mean_kappa_hat']:.6g} "
            f"(theory {entry['kappa_theory']:.6g}, std {entry['std_kappa_hat']:.3g})"
        )
    if not args.no_plot:
        from wmpa.plots import save_amplification_plot

        plot_path = save_amplification_plot(out / "fig2.png", series)
        print(f"wrote {plot_path}")
    return 0


_TRAIN_FIELDS = (
    "delta_deg",
    "theta",
    "fidelity",
    "fidelity_deficit",
    "train_prob",
    "protocol_prob",
    "prob_diff",
)


def cmd_train_check(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = _resolve(args, default_seed_count=1)
    out = _prepare_out(config)

    if args.emit_train is not None:
        if config.delta_deg is None:
            raise ConfigError(
                "emitting a train needs a post-selection offset "
                "(--delta or [protocol].delta_deg)"
            )
        theta = config.thetas[0]
        train = build_figure1_train(config.delta_deg, theta, include_analyzer=False)
        path = _write_json(Path(args.emit_train), train.to_dict())
        print(
            f"wrote {path} (pre-analyzer train at delta = {config.delta_deg:g} deg, "
            f"theta = {theta:g} rad)"
        )
        return 0

    grid_mode = args.train is None
    if grid_mode:
        if not (0.0 < args.delta_min <= args.delta_max < 22.5):
            raise ConfigError(
                "train-check needs 0 < delta-min <= delta-max < 22.5 degrees, got "
                f"{args.delta_min!r} .. {args.delta_max!r}"
            )
        if args.delta_points < 1 or args.theta_points < 1:
            raise ConfigError("train-check needs at least 1 point per axis")
        if not args.theta_min <= args.theta_max:
            raise ConfigError(
                f"train-check needs theta-min <= theta-max, got "
                f"{args.theta_min!r} .. {args.theta_max!r}"
            )
        deltas = [
            float(d) for d in np.linspace(args.delta_min, args.delta_max, args.delta_points)
        ]
        thetas = [
            float(t) for t in np.linspace(args.theta_min, args.theta_max, args.theta_points)
        ]
        reports = [
            check_protocol_equivalence(d, t) for d in deltas for t in thetas
        ]
    else:
        if args.delta is None or not args.theta or len(args.theta) != 1:
            raise ConfigError(
                "--train needs --delta and exactly one --theta fixing the "
                "comparison point"
            )
        try:
            doc = json.loads(Path(args.train).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read train file {args.train}: {exc}") from exc
        train = OpticalTrain.from_dict(doc)
        reports = [check_protocol_equivalence(args.delta, args.theta[0], train=train)]

    rows = [
        {
            "delta_deg": r.delta_deg,
            "theta": r.theta,
            "fidelity": r.fidelity,
            "fidelity_deficit": r.fidelity_deficit,
            "train_prob": r.train_prob,
            "protocol_prob": r.protocol_prob,
            "prob_diff": r.prob_diff,
        }
        for r in reports
    ]
    command = _command_line(argv)
    csv_path = _write_csv(
        out / "train_check.csv", _TRAIN_FIELDS, rows, command, config.to_dict()
    )
    max_deficit = max(r["fidelity_deficit"] for r in rows)
    max_prob_diff = max(r["prob_diff"] for r in rows)
    summary = {
        "command": command,
        "config": config.to_dict(),
        "n_points": len(rows),
        "max_fidelity_deficit": max_deficit,
        "max_prob_diff": max_prob_diff,
    }
    summary_path = _write_json(out / "train_check_summary.json", summary)
    print(f"wrote {csv_path}")
    print(f"wrote {summary_path}")
    print(
        f"max fidelity deficit = {max_deficit:.3e}, "
        f"max success-probability difference = {max_prob_diff:.3e} "
        f"over {len(rows)} point(s)"
    )
    if grid_mode and not args.no_plot:
        from wmpa.plots import save_train_check_plot

        shape = (len(deltas), len(thetas))
        plot_path = save_train_check_plot(
            out / "train_check.png",
            deltas,
            thetas,
            np.array([r["fidelity_deficit"] for r in rows]).reshape(shape),
            np.array([r["prob_diff"] for r in rows]).reshape(shape),
        )
        print(f"wrote {plot_path}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("configuration")
    group.add_argument("--config", type=Path, metavar="FILE", help="TOML configuration file")
    group.add_argument(
        "--out", type=Path, metavar="DIR", help="output directory (default: wmpa-out)"
    )
    group.add_argument(
        "--seed",
        type=int,
        metavar="N",
        help="first seed (counts upward when a command needs several)",
    )
    group.add_argument("--n-seeds", type=int, metavar="K", help="number of seeds")
    group.add_argument(
        "--delta", type=float, metavar="DEG", help="post-selection offset in degrees"
    )
    group.add_argument(
        "--theta",
        type=float,
        metavar="RAD",
        action="append",
        help="signal phase in radians (repeatable)",
    )
    group.add_argument("--rate", type=float, metavar="CPS", help="photon rate, counts/s")
    group.add_argument(
        "--duration", type=float, metavar="S", help="counting window, seconds"
    )
    group.add_argument(
        "--visibility", type=float, metavar="V", help="interference visibility in (0, 1]"
    )
    group.add_argument(
        "--lcvr-jitter-std",
        type=float,
        metavar="RAD",
        help="std dev of retardance jitter, radians",
    )
    group.add_argument(
        "--dark-rate",
        type=float,
        metavar="CPS",
        help="dark counts per second per detector",
    )
    group.add_argument(
        "--no-plot", action="store_true", help="emit data only, skip figure rendering"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="wmpa",
        description=(
            "Simulate and verify weak-measurement amplification of "
            "ultra-small longitudinal phases."
        ),
        epilog=(
            "exit status: 0 success; 2 configuration or validation error; "
            "3 domain error"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "calibrate",
        parents=[common],
        help="solve the selection geometry from a simulated signal-off run",
    )
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser(
        "run",
        parents=[common],
        help="simulate counting runs and estimate each configured phase",
    )
    p.add_argument(
        "--calibration",
        type=Path,
        metavar="FILE",
        help="calibration JSON (default: exact values from the geometry)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser(
        "sweep",
        parents=[common],
        help="trace the amplification curve kappa(theta) over a phase grid",
    )
    p.add_argument("--theta-min", type=float, default=0.01, metavar="RAD")
    p.add_argument("--theta-max", type=float, default=0.15, metavar="RAD")
    p.add_argument("--points", type=int, default=15, metavar="N")
    p.add_argument(
        "--calibration",
        type=Path,
        metavar="FILE",
        help="calibration JSON (default: exact values from the geometry)",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "compare",
        parents=[common],
        help="amplified vs conventional readout at a shared photon budget",
    )
    p.add_argument(
        "--mode",
        choices=COMPARISON_MODES,
        default=None,
        help=f"photon-budget convention (default: {DEFAULT_MODE})",
    )
    p.add_argument(
        "--calibration",
        type=Path,
        metavar="FILE",
        help="calibration JSON (default: exact values from the geometry)",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(
        "reproduce-fig2",
        parents=[common],
        help="standard dataset: kappa vs theta for several magnifications",
    )
    p.add_argument(
        "--h",
        type=float,
        metavar="H",
        action="append",
        help="magnification to include (repeatable; default 3, 5, 10)",
    )
    p.set_defaults(func=cmd_reproduce_fig2)

    p = sub.add_parser(
        "train-check",
        parents=[common],
        help="audit the bench model against the abstract protocol",
    )
    p.add_argument("--delta-min", type=float, default=0.5, metavar="DEG")
    p.add_argument("--delta-max", type=float, default=22.0, metavar="DEG")
    p.add_argument("--delta-points", type=int, default=20, metavar="N")
    p.add_argument("--theta-min", type=float, default=0.0, metavar="RAD")
    p.add_argument("--theta-max", type=float, default=0.2, metavar="RAD")
    p.add_argument("--theta-points", type=int, default=20, metavar="N")
    p.add_argument(
        "--train",
        type=Path,
        metavar="FILE",
        help="check a custom train (JSON) instead of the built-in bench layout",
    )
    p.add_argument(
        "--emit-train",
        type=Path,
        metavar="FILE",
        help="write the built-in pre-analyzer train as JSON and exit",
    )
    p.set_defaults(func=cmd_train_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.func(args, argv)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except WmpaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
