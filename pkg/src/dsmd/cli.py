"""Command-line front end.

Subcommands: run, sweep, verify-bounds, dump-topology.  Exit codes:
0 ok, 2 bad config, 3 envelope violation, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from . import harness as hz


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("config", help="path to a key = value config file")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel path workers (default: DSMD_WORKERS or "
                        "cpu count; results are worker-count independent)")
    p.add_argument("--out", default=None,
                   help="output directory (default: DSMD_OUT or output.dir)")
    p.add_argument("--seed-offset", type=int, default=0,
                   help="added to every path seed")
    p.add_argument("--thin", type=int, default=None,
                   help="CSV thinning stride override")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dsmd",
        description="distributed stochastic mirror descent on two-network "
                    "zero-sum matrix games")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run one experiment"))
    sp = sub.add_parser("sweep", help="run one experiment per axis value")
    _add_common(sp)
    sp.add_argument("--axis", required=True,
                    choices=("schedule", "topology"))
    _add_common(sub.add_parser("verify-bounds",
                               help="run and check theoretical envelopes"))
    _add_common(sub.add_parser("dump-topology",
                               help="print mixing matrices and constants"))
    return ap


def _load(args) -> dict:
    cfg = hz.load_config(args.config)
    if args.thin is not None:
        if args.thin < 1:
            raise hz.ConfigError("--thin must be >= 1")
        cfg["output.thin"] = args.thin
    return cfg


def _out_dir(args, cfg) -> str:
    if args.out is not None:
        return args.out
    return os.environ.get("DSMD_OUT") or cfg["output.dir"]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except (OSError, hz.ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return hz.EXIT_CONFIG

    try:
        if args.command == "run":
            rep = hz.run_experiment(cfg, workers=args.workers,
                                    seed_offset=args.seed_offset,
                                    out_dir=_out_dir(args, cfg))
            for w in rep.warnings:
                print(f"warning: {w}", file=sys.stderr)
            gap = rep.by_id("gap")
            print(f"paths={len(rep.path_seeds)} T={cfg['run.horizon']} "
                  f"final mean gap={float(gap.mean[-1]):.6g} "
                  f"({rep.wallclock_s:.1f}s)")
            return (hz.EXIT_NONCONVERGENCE if rep.warnings else hz.EXIT_OK)

        if args.command == "sweep":
            reports, failures, _ = hz.sweep(
                cfg, args.axis, workers=args.workers,
                seed_offset=args.seed_offset, out_dir=_out_dir(args, cfg))
            for tag, rep in reports:
                gap = rep.by_id("gap")
                flag = " (warnings)" if rep.warnings else ""
                print(f"{tag}: final mean gap={float(gap.mean[-1]):.6g}"
                      f"{flag}")
            for tag, code, msg in failures:
                print(f"{tag}: FAILED ({msg})", file=sys.stderr)
            if failures:
                return failures[0][1]
            if any(rep.warnings for _, rep in reports):
                return hz.EXIT_NONCONVERGENCE
            return hz.EXIT_OK

        if args.command == "verify-bounds":
            ver = hz.verify_bounds(cfg, workers=args.workers,
                                   seed_offset=args.seed_offset)
            for line in ver.lines:
                print(line)
            for w in ver.report.warnings:
                print(f"warning: {w}", file=sys.stderr)
            if not ver.passed:
                return hz.EXIT_VIOLATION
            if ver.report.warnings:
                return hz.EXIT_NONCONVERGENCE
            return hz.EXIT_OK

        # dump-topology
        print(hz.dump_topology(cfg), end="")
        return hz.EXIT_OK
    except hz.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return hz.EXIT_CONFIG
    except hz.NonConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return hz.EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
