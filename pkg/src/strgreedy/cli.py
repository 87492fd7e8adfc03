"""Command-line entry point: ``strgreedy {run,sweep,verify}``.

Exit codes: 0 success, 1 usage or configuration error, 2 certification
failure (a bound whose assumptions were verified is beaten by the true
greedy/optimum ratio).
"""
import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import _kernels
from .core import enumeration_estimate
from .errors import ConfigError, EnumerationTooLarge, StrGreedyError
from .experiment import (EXIT_CERT, EXIT_CONFIG, EXIT_OK, build_instance,
                         format_certification,
                         load_config, load_sweep, run, sweep, verify_batch,
                         write_csv, write_run)

log = logging.getLogger("strgreedy")


def _overrides(config, args, force_oracle=False):
    kw = {}
    if force_oracle:
        kw["run_oracle"] = True
    elif args.oracle is not None:
        kw["run_oracle"] = args.oracle
    if args.oracle_cap is not None:
        kw["oracle_cap"] = args.oracle_cap
    if args.tol is not None:
        kw["tolerance"] = args.tol
    if args.seed is not None:
        kw["seed"] = args.seed
    return dataclasses.replace(config, **kw) if kw else config


def cmd_run(args):
    config = _overrides(load_config(args.config), args)
    result = run(config)
    for w in result.warnings:
        log.warning(w)
    if args.out:
        report, summary = write_run(result, args.out, timing=args.timing)
        print(f"wrote {report} and {summary}")
    b = result.bounds
    print(f"greedy {list(result.trace.chosen)}  f = {b.greedy_value:.10g}")
    print("  ".join(f"{n}={'-' if getattr(b, n) is None else format(getattr(b, n), '.4f')}"
                    for n in ("beta0", "beta_nemhauser", "beta1", "beta2", "beta_stepwise")))
    if result.certification is not None:
        print(format_certification(result))
    return result.exit_code


def cmd_sweep(args):
    spec = load_sweep(args.config)
    spec = dataclasses.replace(spec, base=_overrides(spec.base, args))
    results, rows = sweep(spec, workers=args.workers, timing=args.timing)
    text = write_csv(rows, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(rows)} rows to {args.out}")
    failed = any(r.exit_code == EXIT_CERT for r in results)
    return EXIT_CERT if failed else EXIT_OK


def cmd_verify(args):
    config = _overrides(load_config(args.config), args, force_oracle=True)
    if config.batch is not None:
        summary = verify_batch(config)
        print(f"instances: {summary.count}")
        print("assumption patterns (A1A2A3): " + json.dumps(
            dict(sorted(summary.assumption_counts.items()))))
        for name, n in sorted(summary.supported.items()):
            bad = sum(1 for v in summary.violations if v[1] == name)
            print(f"{name:<15} supported on {n:>5}  violations {bad}")
        for seed, name, value, ratio in summary.violations:
            print(f"VIOLATION seed={seed} {name}={value:.10g} ratio={ratio:.10g}")
        return EXIT_OK if summary.ok else EXIT_CERT
    # verification demands the oracle: a cap overflow is fatal here
    _, constraint = build_instance(config)
    estimate = enumeration_estimate(constraint)
    if estimate > config.oracle_cap:
        raise EnumerationTooLarge(estimate, config.oracle_cap)
    result = run(config, check_submodular=False)
    print(format_certification(result))
    if args.out:
        Path(args.out).write_text(json.dumps(result.to_dict(), indent=2) + "\n",
                                  encoding="utf-8")
    return result.exit_code


def build_parser():
    p = argparse.ArgumentParser(
        prog="strgreedy",
        description="Greedy string optimization with computable performance bounds.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="JSON config path, or bundled:<name> for a bundled fixture")
    common.add_argument("--out", default=None,
                        help="run: output directory; sweep: CSV path; verify: JSON path")
    common.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None,
                        help="run the brute-force oracle (default: from config)")
    common.add_argument("--oracle-cap", type=int, default=None)
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance for assumption checks")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--timing", action="store_true",
                        help="fill the runtime_ms CSV column (breaks byte-determinism)")
    common.add_argument("-v", "--verbose", action="store_true")

    sub.add_parser("run", parents=[common], help="single experiment").set_defaults(func=cmd_run)
    sp = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    sub.add_parser("verify", parents=[common],
                   help="certify bounds against the oracle").set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    log.debug("kernel backend: %s", _kernels.BACKEND)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StrGreedyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
