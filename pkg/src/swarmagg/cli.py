"""Command line entry point: ``swarmagg <verb> ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .analysis import rho_theorem1, rho_theorem2
from .config import load_scenario
from .coupling import lambda2, laplacian, load_matrix, total_weight, validate_coupling
from .errors import ConfigError, DegenerateSpectrumError, GenerationError, PreconditionError, SwarmError
from .kernel import GaussianKernel
from .runner import (
    EXIT_CONFIG,
    EXIT_GENERATION,
    EXIT_INVALID_COUPLING,
    EXIT_NOT_CONTAINED,
    EXIT_OK,
    output_root,
    run_batch,
    run_scenario,
    write_summary,
)


def cmd_run(args):
    code, out_dir, payload = run_scenario(args.config, args.output_root, plot=not args.no_plot)
    if out_dir is None:
        print(f"error: {payload}", file=sys.stderr)
        return code
    print(payload.report.to_text(), end="")
    print(f"artifacts: {out_dir}")
    return code


def cmd_batch(args):
    rows = run_batch(args.directory, parallel=args.parallel, root=args.output_root, plot=args.plot)
    root = output_root(args.output_root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "summary.csv", "w", newline="") as fh:
        write_summary(rows, fh)
    write_summary(rows, sys.stdout)
    return EXIT_OK if all(r["exit_code"] == EXIT_OK for r in rows) else EXIT_NOT_CONTAINED


def cmd_validate(args):
    try:
        W = load_matrix(args.matrix)
    except (OSError, SwarmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = validate_coupling(W)
    print(f"n_agents: {W.n_agents}")
    print("\n".join(report.lines()))
    return EXIT_OK if report.ok else EXIT_INVALID_COUPLING


def cmd_bounds(args):
    try:
        sc = load_scenario(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    try:
        lam2 = lambda2(laplacian(sc.coupling))
        rows = [("lambda2", lam2), ("M", total_weight(sc.coupling))]
        if isinstance(sc.kernel, GaussianKernel):
            b1 = rho_theorem1(sc.kernel, sc.coupling)
            rows += [("rho", b1.rho), ("threshold_V", b1.threshold_V)]
        else:
            rows += [("rho", None)]
        rows += [("rho_star", rho_theorem2(sc.kernel, sc.coupling).rho)]
    except (DegenerateSpectrumError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_COUPLING
    for key, value in rows:
        print(f"{key}: {'n/a' if value is None else repr(value)}")
    return EXIT_OK


def cmd_plot(args):
    from .plotting import render_run

    for path in render_run(args.run_dir):
        print(path)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="swarmagg", description="Nonreciprocal swarm aggregation runner.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("config")
    run.add_argument("--output-root", help="overrides $SWARMAGG_OUTPUT_ROOT (default ./runs)")
    run.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", help="run every *.ini scenario in a directory")
    batch.add_argument("directory")
    batch.add_argument("--parallel", type=int, default=1)
    batch.add_argument("--output-root")
    batch.add_argument("--plot", action="store_true", help="render figures for each run")
    batch.set_defaults(func=cmd_batch)

    val = sub.add_parser("validate-coupling", help="check a whitespace-separated matrix file")
    val.add_argument("matrix")
    val.set_defaults(func=cmd_validate)

    bounds = sub.add_parser("bounds", help="print lambda2, M, rho, rho_star without simulating")
    bounds.add_argument("config")
    bounds.set_defaults(func=cmd_bounds)

    plot = sub.add_parser("plot", help="render figures for an existing run directory")
    plot.add_argument("run_dir")
    plot.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
