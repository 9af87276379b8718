"""Command-line front end.

Exit codes: 0 success / verification passed, 1 runtime error, 2 verification
failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, checks, qcqc
from .estimator import plan, variance_bound
from .experiment import ConfigError, ExperimentConfig, run_experiment

EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2, 3

log = logging.getLogger("qcshadow")


def _add_common(p: argparse.ArgumentParser, seed_required: bool = False):
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--mode", choices=("baseline", "qcqc"))
    p.add_argument("--scheme", choices=("pauli", "clifford"))
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--threads", type=int)
    p.add_argument("--dense-cap", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcshadow",
        description="Classical shadow tomography with QCQC re-preparation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="plan, acquire, estimate and report")
    _add_common(p, seed_required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("acquire", help="phase 1 only: write a record file")
    _add_common(p, seed_required=True)

    p = sub.add_parser("estimate", help="estimate from an existing record file")
    _add_common(p)
    p.add_argument("--records", required=True, help="record file from `acquire`")
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("verify", help="run a Monte Carlo verification suite")
    p.add_argument("suite", choices=checks.SUITES)

    p = sub.add_parser("bench", help="baseline vs QCQC timing and space table")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--records", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dense-cap", type=int, default=10)
    p.add_argument("--out", help="CSV path (default: table on stdout)")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    for key, attr in (("seed", "seed"), ("mode", "mode"), ("scheme", "scheme"),
                      ("threads", "threads"), ("dense_cap", "dense_cap"), ("out", "out")):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, attr, val)
    cfg.validate()
    return cfg


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    report = run_experiment(cfg)
    _emit(report.to_json() if args.format == "json" else report.to_text(), cfg.out)
    return EXIT_OK


def cmd_acquire(args) -> int:
    cfg = _load_config(args)
    state, observables = cfg.build()
    var = max(variance_bound(o, cfg.scheme) for o in observables)
    p = plan(cfg.epsilon, cfg.delta, len(observables), var)
    N = cfg.N or p.N
    counter = qcqc.CopyCounter()
    records = qcqc.acquire(state, cfg.scheme, N, np.random.default_rng(cfg.seed), counter)
    if not cfg.out:
        raise ConfigError("acquire needs --out for the record file")
    qcqc.write_records(cfg.out, records, cfg.seed, counter.value)
    log.info("wrote %d records to %s", N, cfg.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load_config(args)
    records, meta = qcqc.read_records(args.records)
    if meta["scheme"] != cfg.scheme or meta["n"] != cfg.n:
        raise ConfigError("record file does not match the config's scheme/n")
    if cfg.seed is None:
        cfg.seed = int(meta["seed"])
    if cfg.N is None:
        cfg.N = len(records)
    report = run_experiment(cfg, records=records)
    _emit(report.to_json() if args.format == "json" else report.to_text(), cfg.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = checks.run_suite(args.suite)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_bench(args) -> int:
    if args.n_max > args.dense_cap:
        raise ConfigError(f"--n-max {args.n_max} exceeds --dense-cap {args.dense_cap}")
    table = bench.bench_compare(range(args.n_min, args.n_max + 1), args.records, args.seed,
                                dense_cap=args.dense_cap)
    if args.out:
        Path(args.out).write_text(table.to_csv())
        slopes = Path(args.out).with_suffix(".slopes.json")
        slopes.write_text(json.dumps(table.slopes, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(table.to_text())
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "acquire": cmd_acquire,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; that code means "verification
        # failure" here, so report bad usage as a configuration error
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface as a runtime failure
        log.debug("unhandled error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
