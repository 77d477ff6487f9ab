"""Command-line entry point ``isac-beamopt``.

No environment variables are consulted; everything comes from flags and the
optional config file.
"""

import argparse
import logging
import sys

from .errors import ConfigError
from .experiment import MODES, emit_trace, parse_config, run_experiment, summarize_runtime, write_csv

EXIT_CONFIG = 2
EXIT_IO = 3

log = logging.getLogger("isac_beamopt")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isac-beamopt",
        description="SCA-SGPI beamforming for sum rate / CRLB tradeoffs in ISAC.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override one config key (repeatable)")
    parser.add_argument("--out", metavar="PATH", help="result CSV path ('-' for stdout)")
    parser.add_argument("--trace", metavar="PATH",
                        help="convergence trace CSV (single and trace modes)")
    parser.add_argument("--seed", type=int, help="base seed; realization r uses seed + r")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument("--no-timing", action="store_true",
                        help="write runtime_ms as 0 so output files are byte-reproducible")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = parse_config(args.config, args.overrides, mode=args.mode, seed=args.seed)
    except ConfigError as exc:
        print(f"isac-beamopt: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"isac-beamopt: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.jobs < 1:
        print("isac-beamopt: configuration error: jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    trace_path = args.trace
    if spec.mode == "trace" and trace_path is None:
        trace_path = "trace.csv"
    if trace_path and spec.mode not in ("single", "trace"):
        print("isac-beamopt: configuration error: --trace needs single or trace mode",
              file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows, traces = run_experiment(spec, jobs=args.jobs, keep_traces=True)
    except ConfigError as exc:
        print(f"isac-beamopt: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.no_timing:
        for row in rows:
            row.runtime_ms = 0.0
    log.info(summarize_runtime(rows))

    try:
        write_csv(rows, args.out or spec.output, spec)
        if trace_path and traces[0] is not None:
            emit_trace(traces[0], trace_path)
    except OSError as exc:
        print(f"isac-beamopt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
