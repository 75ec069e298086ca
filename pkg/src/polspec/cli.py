"""Command-line front end: run spectra, export band diagrams, analyze CSVs.

Exit codes are machine-readable: 0 success, 2 configuration error,
3 solver convergence failure, 4 I/O error, 5 internal error.  Every failure
prints a single ``<category>: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bands import compute_bands, count_bound_bands
from .diagnostics import analyze_spectrum, side_integrals
from .model import derive_scales
from .runio import (
    PRESETS,
    ConfigError,
    RunFailure,
    parse_config,
    read_spectrum_csv,
    run,
    write_output,
)
from .tdse import ConvergenceError


def _build_config(args):
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError("give either --config or --preset, not both")
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}"
            )
        doc = json.loads(json.dumps(PRESETS[args.preset]))
    elif getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise OSError(f"while reading config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    else:
        raise ConfigError("a run needs --config FILE or --preset NAME")
    if getattr(args, "models", None):
        doc["models"] = [name.strip() for name in args.models.split(",") if name.strip()]
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        doc["workers"] = args.workers
    if getattr(args, "out", None):
        doc["output"] = args.out
    return parse_config(json.dumps(doc))


def _cmd_run(args) -> int:
    config = _build_config(args)
    if config.output is None:
        raise ConfigError("run needs an output prefix (--out or the output key)")
    try:
        spectra, report = run(config)
    except RunFailure as exc:
        write_output(exc.spectra, exc.report, config.output)
        raise
    paths = write_output(spectra, report, config.output)
    for path in paths:
        print(path)
    return 0


def _cmd_bands(args) -> int:
    config = _build_config(args)
    scales = derive_scales(config.lattice)
    depth = config.lattice.v1 if args.level == 1 else config.lattice.v2
    bands = compute_bands(depth, scales, n_points=args.points, half_width=args.half_width)
    n_bands = args.n_bands
    if n_bands is None:
        n_bands = count_bound_bands(bands) + 8
    n_bands = min(n_bands, bands.energies.shape[0])
    header = "p0_hbar_k," + ",".join(f"band_{i}_rad_per_s" for i in range(n_bands))
    lines = [header]
    for ip, q in enumerate(bands.p0):
        row = [f"{q:.12g}"] + [f"{bands.energies[i, ip]:.12g}" for i in range(n_bands)]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"while writing band diagram {args.out}: {exc}") from exc
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_analyze(args) -> int:
    spec = read_spectrum_csv(args.infile)
    analysis = analyze_spectrum(spec, smooth=args.smooth)
    result = {
        "input": args.infile,
        "analysis": analysis.to_dict(),
        "side_integrals": side_integrals(spec),
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"while writing analysis {args.out}: {exc}") from exc
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def _add_config_flags(parser, with_run_flags=True):
    parser.add_argument("--config", help="JSON run description")
    parser.add_argument("--preset", help=f"named parameter set ({', '.join(sorted(PRESETS))})")
    if with_run_flags:
        parser.add_argument("--models", help="comma-separated subset of tdse,fgr,semiclassical")
        parser.add_argument("--seed", type=int, help="Monte Carlo seed override")
        parser.add_argument("--workers", type=int, help="worker process count")
        parser.add_argument("--out", help="output path prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polspec",
        description="Modulation spectra of lattice-trapped atoms "
        "(momentum-ladder TDSE, Bloch/golden-rule, semiclassical).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="compute spectra and write CSV + report")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_bands = sub.add_parser("bands", help="export a band diagram as CSV")
    _add_config_flags(p_bands, with_run_flags=False)
    p_bands.add_argument("--level", type=int, choices=(1, 2), default=1)
    p_bands.add_argument("--points", type=int, default=200)
    p_bands.add_argument("--half-width", type=int, default=16)
    p_bands.add_argument("--n-bands", type=int, default=None)
    p_bands.add_argument("--out", help="CSV path (default: stdout)")
    p_bands.set_defaults(func=_cmd_bands)

    p_an = sub.add_parser("analyze", help="extract peaks/dip from a spectrum CSV")
    p_an.add_argument("--in", dest="infile", required=True, help="spectrum CSV path")
    p_an.add_argument("--out", help="JSON path (default: stdout)")
    p_an.add_argument("--smooth", type=int, default=0, help="moving-average window")
    p_an.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2
    except (RunFailure, ConvergenceError) as exc:
        print(f"convergence: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
