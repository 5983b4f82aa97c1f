"""Command line entry point.

    qdcavity simulate --preset fig2a --out fig2a.csv
    qdcavity simulate --config my.cfg --out run.csv
    qdcavity sweep --preset fig3 --param gamma_d --from 0 --to 1 --steps 101 --out fig3.csv
    qdcavity --validate
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .dynamics import NumericalInvariantError
from .experiments import PRESETS, SWEEPABLE, ConfigError, SweepSpec, get_preset, parse_config, run_scenario, run_sweep
from .linops import DensityMatrixError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("qdcavity")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdcavity", description=__doc__.split("\n")[0])
    parser.add_argument("--validate", action="store_true",
                        help="run the invariant suite and exit nonzero on failure")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="run one scenario and write CSV")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", help="path to a 'key = value' scenario file")
    sim.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    sw = sub.add_parser("sweep", help="sweep one parameter of a preset and write CSV")
    sw.add_argument("--preset", required=True, choices=sorted(PRESETS))
    sw.add_argument("--param", required=True, choices=SWEEPABLE)
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--steps", type=int, default=101)
    sw.add_argument("--workers", type=int, default=1, help="rows computed in parallel")
    sw.add_argument("--out", default="-")
    return parser


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _validate() -> int:
    from .validation import run_validation

    results = run_validation()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")

    if args.validate:
        return _validate()
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "simulate":
            if args.preset:
                scenario = get_preset(args.preset)
            else:
                try:
                    with open(args.config) as fh:
                        text = fh.read()
                except OSError as exc:
                    raise ConfigError("config", str(exc)) from None
                scenario = parse_config(text, name=args.config)
            log.info("running %s", scenario.name)
            _write(args.out, run_scenario(scenario).to_csv())
        else:
            spec = SweepSpec(args.param, args.start, args.stop, args.steps, get_preset(args.preset))
            log.info("sweeping %s over %d values", args.param, args.steps)
            _write(args.out, run_sweep(spec, max_workers=args.workers).to_csv())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if isinstance(exc, DensityMatrixError):
            print(f"numerical invariant violated: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInvariantError as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
