"""Command-line interface orchestrating the analysis library.

Exit codes: 0 on success, 2 on input errors (bad flags, malformed files,
invalid parameters), 3 on numerical failures. Stochastic commands require a
seed, either via ``--seed`` or the ``seed`` key of the config file; given
identical flags, config, and seed, every command is byte-deterministic in
its outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .detection import (
    ThresholdPolicy,
    default_threshold_grid,
    detection_curve,
    dilution_boundary,
    false_confidence_demo,
    proof_halfwidth,
)
from .errors import InputValidationError, NumericalError
from .fileio import (
    Config,
    conjunction_json_text,
    curve_csv_text,
    load_config,
    parse_conjunction,
    write_json,
)
from .probability import dilution_curve, pc_contour
from .geometry import standardized_encounter
from .propositions import Ball, Complement
from .screening import screen_conjunction
from .validity import (
    AdditiveGaussianRule,
    gaussian_region_rule,
    gaussian_sampling_model,
    validity_check,
)

_STOCHASTIC_HINT = "provide --seed or set 'seed' in the config file"


def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def _resolve_seed(args, config: Config) -> int:
    seed = args.seed if args.seed is not None else config.seed
    if seed is None:
        raise InputValidationError(f"this command is stochastic; {_STOCHASTIC_HINT}")
    return int(seed)


def _read_conjunction(args):
    path = Path(args.input)
    fmt = args.input_format
    if fmt == "auto":
        suffix = path.suffix.lower()
        if suffix == ".json":
            fmt = "json"
        elif suffix == ".kvn":
            fmt = "kvn"
        else:
            raise InputValidationError(
                f"cannot infer format from suffix {suffix!r}; "
                "pass --input-format json|kvn"
            )
    return parse_conjunction(path.read_bytes(), fmt)


def _emit(args, config: Config, json_doc: dict, csv_text: str | None) -> None:
    if args.output is None:
        return
    if args.format == "json":
        write_json(json_doc, args.output)
    else:
        if csv_text is None:
            raise InputValidationError("this command has no CSV representation")
        with open(args.output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(csv_text)


def _cmd_pc(args, config: Config) -> int:
    cf = _read_conjunction(args)
    enc = standardized_encounter(cf.to_joint_state())
    result = pc_contour(enc, n_quad=args.n_quad, quad_floor=config.quad_floor)
    prec = config.output_precision
    print(_fmt(result.pc, prec))
    if result.below_min_quad:
        print(
            "warning: requested quadrature count is below the anisotropy rule",
            file=sys.stderr,
        )
    doc = {
        "pc": result.pc,
        "n_quad": result.n_quad,
        "quad_error_est": result.quad_error_est,
        "below_min_quad": result.below_min_quad,
    }
    csv_text = (
        "pc,n_quad,quad_error_est\n"
        f"{_fmt(result.pc, prec)},{result.n_quad},{_fmt(result.quad_error_est, prec)}\n"
    )
    _emit(args, config, doc, csv_text)
    return 0


def _cmd_dilution_curve(args, config: Config) -> int:
    curve = dilution_curve(args.d_over_r, args.s_min, args.s_max, args.n_points)
    prec = config.output_precision
    csv_text = curve_csv_text(curve, precision=prec)
    doc = {
        "d_over_r": curve.d_over_r,
        "peak_s_over_r": curve.peak_s_over_r,
        "peak_pc": curve.peak_pc,
        "grid": [[s, p] for s, p in curve.grid],
    }
    if args.output is None:
        sys.stdout.write(csv_text)
    else:
        _emit(args, config, doc, csv_text)
        print(
            f"peak_s_over_r={_fmt(curve.peak_s_over_r, prec)} "
            f"peak_pc={_fmt(curve.peak_pc, prec)}"
        )
    return 0


def _parse_threshold_grid(spec: str) -> np.ndarray | None:
    if spec == "default":
        return None
    try:
        values = [float(part) for part in spec.split(",") if part.strip()]
    except ValueError:
        raise InputValidationError(
            f"--threshold-grid must be 'default' or comma-separated floats, "
            f"got {spec!r}"
        ) from None
    if not values:
        raise InputValidationError("--threshold-grid is empty")
    return np.asarray(values)


def _cmd_detection_curve(args, config: Config) -> int:
    thresholds = _parse_threshold_grid(args.threshold_grid)
    if thresholds is None:
        thresholds = default_threshold_grid(ThresholdPolicy())
    seed = None
    n_trials = args.n_trials if args.n_trials is not None else config.mc_trials
    if args.method == "monte-carlo":
        seed = _resolve_seed(args, config)
    curve = detection_curve(
        args.s_over_r,
        args.d_true,
        thresholds=thresholds,
        method=args.method,
        n_trials=n_trials,
        seed=seed,
    )
    csv_text = curve_csv_text(curve, precision=config.output_precision)
    doc = {
        "s_over_r": curve.s_over_r,
        "d_true_over_r": curve.d_true_over_r,
        "method": curve.method,
        "seed": curve.seed,
        "points": [
            {"threshold": t, "detection_rate": 1.0 - f, "failure_probability": f}
            for t, f in curve.points
        ],
    }
    if args.output is None:
        sys.stdout.write(csv_text)
    else:
        _emit(args, config, doc, csv_text)
        print(f"wrote {len(curve.points)} thresholds to {args.output}")
    return 0


def _cmd_boundary(args, config: Config) -> int:
    boundary = dilution_boundary(args.threshold)
    prec = config.output_precision
    doc = {"threshold": args.threshold, "s_over_r_boundary": boundary}
    row_names = "threshold,s_over_r_boundary"
    row_values = f"{_fmt(args.threshold, prec)},{_fmt(boundary, prec)}"
    print(_fmt(boundary, prec))
    if args.combined_radius is not None:
        if args.combined_radius <= 0:
            raise InputValidationError(
                f"--combined-radius must be positive, got {args.combined_radius}"
            )
        meters = boundary * args.combined_radius
        doc["uncertainty_m"] = meters
        row_names += ",uncertainty_m"
        row_values += f",{_fmt(meters, prec)}"
        print(_fmt(meters, prec))
    _emit(args, config, doc, f"{row_names}\n{row_values}\n")
    return 0


def _cmd_screen(args, config: Config) -> int:
    cf = _read_conjunction(args)
    decision = screen_conjunction(cf.to_joint_state(), args.k_sigma)
    doc = decision.to_json_dict()
    import json as _json

    print(_json.dumps(doc, sort_keys=True, indent=2))
    header = ",".join(doc)
    row = ",".join(
        str(v).lower() if isinstance(v, bool) else _fmt(v, config.output_precision)
        for v in doc.values()
    )
    _emit(args, config, doc, f"{header}\n{row}\n")
    return 0


def _cmd_validity(args, config: Config) -> int:
    seed = _resolve_seed(args, config)
    try:
        alphas = [float(a) for a in args.alpha_grid.split(",") if a.strip()]
    except ValueError:
        raise InputValidationError(
            f"--alpha-grid must be comma-separated floats, got {args.alpha_grid!r}"
        ) from None
    sigma = args.sigma
    cov = np.array([[sigma * sigma]])
    if args.rule == "ksigma":
        rule = gaussian_region_rule(cov)
    else:
        rule = AdditiveGaussianRule(cov)
    report = validity_check(
        rule=rule,
        sampling_model=gaussian_sampling_model([0.0], cov),
        theta_true=[0.0],
        proposition_family=[Complement(Ball(center=[0.0], radius=args.halfwidth))],
        alpha_grid=alphas,
        n_trials=args.n_trials,
        seed=seed,
    )
    csv_text = curve_csv_text(report, precision=config.output_precision)
    if args.output is None:
        sys.stdout.write(csv_text)
    else:
        _emit(args, config, report.to_json_dict(), csv_text)
        print("pass" if report.passed() else "fail")
    return 0


def _cmd_false_confidence(args, config: Config) -> int:
    seed = _resolve_seed(args, config)
    halfwidth = args.halfwidth
    if halfwidth is None:
        halfwidth = proof_halfwidth(args.sigma, args.alpha)
    report = false_confidence_demo(
        sigma=args.sigma,
        halfwidth=halfwidth,
        alpha=args.alpha,
        n_trials=args.n_trials,
        seed=seed,
    )
    prec = config.output_precision
    doc = {
        "alpha": report.alpha,
        "p_target": report.p_target,
        "neighborhood_halfwidth": report.neighborhood_halfwidth,
        "empirical_rate": report.empirical_rate,
        "n_trials": report.n_trials,
        "seed": report.seed,
    }
    print(
        f"empirical_rate={_fmt(report.empirical_rate, prec)} "
        f"p_target={_fmt(report.p_target, prec)} "
        f"halfwidth={_fmt(report.neighborhood_halfwidth, prec)}"
    )
    header = "alpha,p_target,neighborhood_halfwidth,empirical_rate,n_trials,seed"
    row = (
        f"{_fmt(report.alpha, prec)},{_fmt(report.p_target, prec)},"
        f"{_fmt(report.neighborhood_halfwidth, prec)},"
        f"{_fmt(report.empirical_rate, prec)},{report.n_trials},{report.seed}"
    )
    _emit(args, config, doc, f"{header}\n{row}\n")
    return 0


def _add_io_flags(sub: argparse.ArgumentParser, with_input: bool = False) -> None:
    if with_input:
        sub.add_argument("--input", required=True, help="conjunction file path")
        sub.add_argument(
            "--input-format",
            choices=("auto", "json", "kvn"),
            default="auto",
            help="input format (default: infer from the file suffix)",
        )
    sub.add_argument("--output", default=None, help="write results to this path")
    sub.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="output file format (default: json)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conjrisk",
        description=(
            "Conjunction analysis: encounter-plane collision probability, "
            "dilution and detection-rate analysis, and K-sigma ellipsoid "
            "screening."
        ),
    )
    parser.add_argument(
        "--config",
        default=None,
        help="config file path (overrides the CONJRISK_CONFIG environment variable)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    pc = commands.add_parser("pc", help="collision probability for a conjunction file")
    _add_io_flags(pc, with_input=True)
    pc.add_argument("--n-quad", type=int, default=None, help="quadrature point count")
    pc.set_defaults(handler=_cmd_pc)

    dil = commands.add_parser("dilution-curve", help="probability vs uncertainty ratio")
    _add_io_flags(dil)
    dil.add_argument("--d-over-r", type=float, required=True)
    dil.add_argument("--s-min", type=float, default=0.5)
    dil.add_argument("--s-max", type=float, default=1000.0)
    dil.add_argument("--n-points", type=int, default=200)
    dil.set_defaults(handler=_cmd_dilution_curve)

    det = commands.add_parser(
        "detection-curve", help="failure-to-detect probability vs threshold"
    )
    _add_io_flags(det)
    det.add_argument("--s-over-r", type=float, required=True)
    det.add_argument(
        "--d-true", type=float, required=True, help="true miss distance over combined radius"
    )
    det.add_argument("--threshold-grid", default="default")
    det.add_argument(
        "--method", choices=("semi-analytic", "monte-carlo"), default="semi-analytic"
    )
    det.add_argument("--n-trials", type=int, default=None)
    det.add_argument("--seed", type=int, default=None)
    det.set_defaults(handler=_cmd_detection_curve)

    bnd = commands.add_parser(
        "boundary", help="uncertainty ratio beyond which a threshold is unreachable"
    )
    _add_io_flags(bnd)
    bnd.add_argument("--threshold", type=float, required=True)
    bnd.add_argument(
        "--combined-radius",
        type=float,
        default=None,
        help="also report the boundary as an uncertainty in meters",
    )
    bnd.set_defaults(handler=_cmd_boundary)

    scr = commands.add_parser("screen", help="K-sigma ellipsoid screening decision")
    _add_io_flags(scr, with_input=True)
    scr.add_argument("--k-sigma", type=float, default=4.0)
    scr.set_defaults(handler=_cmd_screen)

    val = commands.add_parser(
        "validity", help="empirical validity check of a belief rule (1D scenario)"
    )
    _add_io_flags(val)
    val.add_argument("--rule", choices=("ksigma", "additive"), default="ksigma")
    val.add_argument("--sigma", type=float, default=1.0)
    val.add_argument(
        "--halfwidth",
        type=float,
        required=True,
        help="radius of the excluded neighborhood around the truth",
    )
    val.add_argument("--alpha-grid", default="0.01,0.05,0.1")
    val.add_argument("--n-trials", type=int, default=10000)
    val.add_argument("--seed", type=int, default=None)
    val.set_defaults(handler=_cmd_validity)

    fc = commands.add_parser(
        "false-confidence", help="additive-belief false-confidence simulation"
    )
    _add_io_flags(fc)
    fc.add_argument("--sigma", type=float, default=1.0)
    fc.add_argument("--alpha", type=float, default=0.05)
    fc.add_argument(
        "--halfwidth",
        type=float,
        default=None,
        help="excluded-neighborhood halfwidth (default: the constructive bound)",
    )
    fc.add_argument("--n-trials", type=int, default=10000)
    fc.add_argument("--seed", type=int, default=None)
    fc.set_defaults(handler=_cmd_false_confidence)

    return parser


def run_command(argv) -> int:
    """Run one CLI invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except InputValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
