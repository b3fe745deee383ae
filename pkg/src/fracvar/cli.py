"""Command-line runner: ``fracvar run|list|describe|capacity|example``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import capacity as cap
from . import examples1d as ex
from .grid import Grid
from .reports import _plain, write_csv
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, describe, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _seed(v: str) -> int:
    n = int(v)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracvar", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"fracvar {__version__}")
    ap.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and report its checks")
    r.add_argument("experiment")
    r.add_argument("--config", type=Path, help="key = value file; flags override it")
    r.add_argument("--grid-n", type=int)
    r.add_argument("--grid-l", type=float)
    r.add_argument("--alpha", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--p", type=float)
    r.add_argument("--q", type=float)
    r.add_argument("--backend", choices=["direct", "spectral"])
    r.add_argument("--out", type=str, help="directory for report.json, CSV tables and binary fields")
    r.add_argument("--seed", type=_seed)

    sub.add_parser("list", help="list experiment names")
    d = sub.add_parser("describe", help="describe an experiment")
    d.add_argument("experiment")

    c = sub.add_parser("capacity", help="solve one capacity problem from a config file")
    c.add_argument("--config", type=Path, required=True)
    c.add_argument("--out", type=Path, required=True)

    e = sub.add_parser("example", help="sample a closed-form 1D example to CSV with a JSON verdict")
    e.add_argument("example", choices=ex.EXAMPLES)
    e.add_argument("--alpha", type=float, default=0.5)
    e.add_argument("--grid-n", type=int, default=4096)
    e.add_argument("--grid-l", type=float, default=4.0)
    e.add_argument("--radius", type=float, default=1.0, help="half-width of the indicator interval")
    e.add_argument("--level", type=int, default=6, help="Cantor level for u-alpha")
    e.add_argument("--out", type=Path, required=True)
    return ap


def config_from_args(args) -> ExperimentConfig:
    base = {}
    if args.config is not None:
        try:
            base = cap.read_config(args.config)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
    cfg = ExperimentConfig.from_strings(base | {"experiment": args.experiment})
    for name in ("grid_n", "grid_l", "alpha", "beta", "p", "q", "backend", "out", "seed"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    return cfg


def _run(args) -> int:
    if args.experiment not in EXPERIMENTS:
        print(f"fracvar: unknown experiment {args.experiment!r}; see 'fracvar list'", file=sys.stderr)
        return EXIT_USAGE
    cfg = config_from_args(args)
    rep = run(cfg)
    for rec in rep.records:
        print(rec.line())
    status = "PASS" if rep.passed else "FAIL"
    print(f"{status} {rep.experiment}: {sum(r.passed for r in rep.records)}/{len(rep.records)} checks"
          f" in {rep.timing['wall_s']:.1f} s")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _capacity(args) -> int:
    try:
        prob = cap.problem_from_config(cap.read_config(args.config))
    except (OSError, KeyError) as e:
        raise ConfigError(str(e)) from e
    sol = cap.solve_capacity(prob)
    cap.write_solution(args.out, sol, prob)
    print(f"capacity {sol.value:.12g} kkt {sol.kkt_residual:.3g} iterations {sol.iterations}")
    return EXIT_OK if sol.converged else EXIT_FAIL


def _example(args) -> int:
    g = Grid(1, args.grid_l, args.grid_n)
    x, vals, verdict = ex.example_table(args.example, args.alpha, g, args.radius, args.level)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / f"{args.example}.csv", ["x", "value"], zip(x, vals))
    with open(args.out / f"{args.example}.json", "w") as fh:
        json.dump(_plain(verdict), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(_plain(verdict)))
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=args.log_level, format="%(name)s %(levelname)s %(message)s")
    try:
        if args.command == "list":
            for name in EXPERIMENTS:
                print(name)
            return EXIT_OK
        if args.command == "describe":
            if args.experiment not in EXPERIMENTS:
                print(f"fracvar: unknown experiment {args.experiment!r}", file=sys.stderr)
                return EXIT_USAGE
            print(describe(args.experiment))
            return EXIT_OK
        if args.command == "capacity":
            return _capacity(args)
        if args.command == "example":
            return _example(args)
        return _run(args)
    except ValueError as e:
        # ConfigError and precondition failures of the library
        print(f"fracvar: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
