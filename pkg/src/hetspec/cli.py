"""Command-line front end: config ingestion, dispatch, serialization.

Exit codes: 0 ok, 2 validation error, 3 partial overlap, 4 unmatched or
off-centered squeezer, 5 scheme shape mismatch (optimize), 6 oracle outside
tolerance, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    HetspecError,
    PartialOverlap,
    SchemeShapeError,
    SchemeValidationError,
    SqueezerNotCentered,
    UnmatchedSqueezer,
)
from .fmatrix import build_frequency_matrix, group_entries
from .model import DemodStage, SqueezerSpec, validate_scheme
from .oracle import auto_oracle_config, compare, run_oracle, OracleConfig
from .scheme_io import load_scheme_file
from .spectrum import SpectrumResult, build_context, optimal_phases, total_spectrum

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_PARTIAL_OVERLAP = 3
EXIT_UNMATCHED_SQUEEZER = 4
EXIT_SHAPE = 5
EXIT_ORACLE_FAIL = 6


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spectrum_csv(result: SpectrumResult) -> str:
    header = ["freq_hz", "psd"]
    columns = [result.freqs_hz, result.values]
    for entry in result.breakdown or []:
        header.append(entry.label)
        columns.append(entry.values)
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def _spectrum_json(result: SpectrumResult) -> str:
    payload = {
        "unit": result.unit,
        "freqs_hz": result.freqs_hz.tolist(),
        "psd": result.values.tolist(),
    }
    if result.breakdown is not None:
        payload["breakdown"] = [
            {
                "label": entry.label,
                "kind": entry.kind,
                "members": [list(cell) for cell in entry.members],
                "freq_hz": entry.freq_hz,
                "squeezed": entry.squeezed,
                "values": entry.values.tolist(),
            }
            for entry in result.breakdown
        ]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_matrix(args) -> int:
    scheme_file = load_scheme_file(args.config, degrees=args.degrees)
    scheme = validate_scheme(scheme_file.components, scheme_file.config)
    matrix = build_frequency_matrix(scheme, scheme_file.demods)
    groups, uniques = group_entries(matrix, scheme_file.config)
    if args.format == "json":
        payload = {
            "n_components": matrix.n_components,
            "n_demods": matrix.n_demods,
            "entries_hz": matrix.entries.tolist(),
            "groups": [
                {"freq_hz": g.freq_hz, "members": [list(c) for c in g.members]}
                for g in groups
            ],
            "uniques": [list(c) for c in uniques],
        }
        _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    lines = [
        f"frequency matrix ({matrix.n_components} components, "
        f"{matrix.n_demods} demodulations), entries in Hz"
    ]
    for n in range(matrix.n_components):
        cells = "  ".join(repr(float(x)) for x in matrix.entries[n])
        lines.append(f"  row {n}: {cells}")
    lines.append("coincidence groups:")
    if not groups:
        lines.append("  none")
    for g in groups:
        members = " ".join(f"({n},{d})" for n, d in g.members)
        lines.append(f"  {g.freq_hz!r} Hz: {members}")
    lines.append("unique entries:")
    for n, d in uniques:
        lines.append(f"  ({n},{d}) at {float(matrix.entries[n, d])!r} Hz")
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _compute_result(scheme_file, with_breakdown: bool) -> SpectrumResult:
    return total_spectrum(
        scheme_file.components,
        scheme_file.demods,
        scheme_file.squeezers,
        scheme_file.config,
        grid_points=scheme_file.grid_points,
        with_breakdown=with_breakdown,
    )


def cmd_compute(args) -> int:
    scheme_file = load_scheme_file(args.config, degrees=args.degrees)
    result = _compute_result(scheme_file, args.breakdown)
    if args.format == "json":
        _write(args, _spectrum_json(result))
    else:
        _write(args, _spectrum_csv(result))
    return EXIT_OK


def cmd_oracle(args) -> int:
    scheme_file = load_scheme_file(args.config, degrees=args.degrees)
    analytic = _compute_result(scheme_file, with_breakdown=False)
    if args.duration is None and args.sample_rate is None:
        ocfg = auto_oracle_config(
            scheme_file.components,
            scheme_file.demods,
            scheme_file.config,
            n_trials=args.trials,
            seed=args.seed,
        )
    else:
        if args.duration is None or args.sample_rate is None:
            raise SchemeValidationError(
                "--duration and --sample-rate must be given together"
            )
        ocfg = OracleConfig(
            sample_rate_hz=args.sample_rate,
            duration_s=args.duration,
            n_trials=args.trials,
            seed=args.seed,
        )
    estimate = run_oracle(
        scheme_file.components,
        scheme_file.demods,
        scheme_file.squeezers,
        scheme_file.config,
        ocfg,
    )
    report = compare(analytic, estimate, args.tol)
    payload = report.to_dict()
    payload["oracle_config"] = {
        "sample_rate_hz": ocfg.sample_rate_hz,
        "duration_s": ocfg.duration_s,
        "n_trials": ocfg.n_trials,
        "seed": ocfg.seed,
        "segment_len": ocfg.segment_len,
        "window": ocfg.window,
    }
    _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report.passed else EXIT_ORACLE_FAIL


def cmd_optimize(args) -> int:
    scheme_file = load_scheme_file(args.config, degrees=args.degrees)
    ctx = build_context(
        scheme_file.components,
        scheme_file.demods,
        scheme_file.squeezers,
        scheme_file.config,
    )
    if (
        len(ctx.demods) != 1
        or len(ctx.groups) != 1
        or len(ctx.groups[0].members) != 2
        or len(scheme_file.squeezers) != 1
        or list(ctx.transfers) != [("group", 0)]
    ):
        raise SchemeShapeError(
            "optimize needs one demodulation, exactly one two-member "
            "coincidence group, and one squeezer attached to it"
        )
    group = ctx.groups[0]
    # canonical component order makes the lower-offset member ride the +D
    # column, so the group is always ((n1, 1), (n2, 0))
    (n1, _), (n2, _) = group.members
    c1 = ctx.scheme.components[n1].amplitude
    c2 = ctx.scheme.components[n2].amplitude
    opt = optimal_phases(c1, c2)
    phi_demod = opt.phi_demod_opt
    squeezer = scheme_file.squeezers[0]
    result = total_spectrum(
        scheme_file.components,
        (DemodStage(ctx.demods[0].freq_hz, phi_demod),),
        (SqueezerSpec(squeezer.ref_offset_hz, squeezer.r, opt.phi_squeeze_opt),),
        scheme_file.config,
        grid_points=scheme_file.grid_points,
    )
    payload = {
        "phi_demod_opt_rad": phi_demod,
        "phi_squeeze_opt_rad": opt.phi_squeeze_opt,
        "alpha_rad": opt.alpha,
        "delta_alpha_rad": opt.delta_alpha,
        "minimized_total": result.band_average(),
        "unit": result.unit,
    }
    if args.format == "json":
        _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        lines = [f"{key}: {value!r}" for key, value in payload.items() if key != "unit"]
        lines.append(f"unit: {result.unit}")
        _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetspec",
        description=(
            "Quantum-noise power spectra of demodulated heterodyne "
            "photocurrents, with squeezed vacuum and a Monte Carlo check"
        ),
        epilog=(
            "exit codes: 0 ok, 2 validation error, 3 partial band overlap, "
            "4 unmatched/off-centered squeezer, 5 scheme shape mismatch, "
            "6 oracle outside tolerance, 1 internal error"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default_format):
        p.add_argument("--config", required=True, help="scheme file (.json or .toml)")
        p.add_argument("--output", help="write output here instead of stdout")
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument(
            "--degrees",
            action="store_true",
            help="interpret phase fields in the config as degrees",
        )

    p_matrix = sub.add_parser("matrix", help="print the frequency matrix and groups")
    common(p_matrix, ("text", "json"), "text")
    p_matrix.set_defaults(func=cmd_matrix)

    p_compute = sub.add_parser("compute", help="compute the analytic spectrum")
    common(p_compute, ("csv", "json"), "csv")
    p_compute.add_argument(
        "--breakdown",
        action="store_true",
        help="include per-contribution columns",
    )
    p_compute.set_defaults(func=cmd_compute)

    p_oracle = sub.add_parser(
        "oracle", help="Monte Carlo estimate compared against the analytic spectrum"
    )
    common(p_oracle, ("json",), "json")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--trials", type=int, default=1)
    p_oracle.add_argument("--duration", type=float, help="seconds per trial")
    p_oracle.add_argument("--sample-rate", type=float, help="Hz")
    p_oracle.add_argument("--tol", type=float, default=0.05)
    p_oracle.set_defaults(func=cmd_oracle)

    p_opt = sub.add_parser(
        "optimize", help="noise-minimizing demodulation and squeezing phases"
    )
    common(p_opt, ("text", "json"), "text")
    p_opt.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PartialOverlap as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL_OVERLAP
    except (UnmatchedSqueezer, SqueezerNotCentered) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNMATCHED_SQUEEZER
    except SchemeShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (SchemeValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except HetspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
