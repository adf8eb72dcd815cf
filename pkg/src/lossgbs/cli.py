"""``gbs`` command line.

Exit codes: 0 success, 2 validation error, 3 scale cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, load_config
from .experiment import read_samples, simulate, write_samples
from .figures import fig2_rows, fig3_rows, fig4_rows
from .linear_optics import ScaleCapError
from .postselection import apply_postselection, build_nonuniform_policy, build_policy, default_truncation

EXIT_OK, EXIT_INVALID, EXIT_SCALE = 0, 2, 3


def _fmt(value) -> str:
    return f"{value:.17g}" if isinstance(value, float) else str(value)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def thread_count() -> int:
    """Validated ``GBS_THREADS`` (default 1). Work is evaluated sequentially either way."""
    raw = os.environ.get("GBS_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GBS_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"GBS_THREADS must be a positive integer, got {raw!r}")
    return n


def cmd_fig2(args) -> int:
    _write_csv(args.out, ["eta", "r", "eta_prime_max"], fig2_rows())
    return EXIT_OK


def cmd_fig3(args) -> int:
    grid = [args.r_prime] if args.r_prime is not None else None
    _write_csv(args.out, ["r_prime", "eta_prime", "yield"], fig3_rows(args.variant, grid))
    return EXIT_OK


def cmd_fig4(args) -> int:
    _write_csv(args.out, ["eta", "eps0_raw", "eps0_postselected"], fig4_rows(args.variant))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    run = cfg.run
    if args.seed is not None:
        run = replace(run, rng_seed=args.seed)
    if args.cutoff is not None:
        run = replace(run, cutoff=args.cutoff)
    policy = cfg.policy
    if args.r_prime is not None:
        policy = replace(policy, r_prime=(args.r_prime,), c=None)
    cfg = replace(cfg, run=run, policy=policy)
    result = simulate(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    modes = cfg.bank.mode_count
    for name, records in (("samples.csv", result.samples), ("retained.csv", result.retained)):
        with open(args.out / name, "w", encoding="utf-8", newline="") as fh:
            write_samples(fh, records, modes)
    _write_json(args.out / "report.json", result.report)
    print(json.dumps(result.report, sort_keys=True))
    return EXIT_OK


def cmd_postselect(args) -> int:
    for name in ("r", "r_prime"):
        if getattr(args, name) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")
    if args.eta is None and args.etas is None:
        raise ValueError("give --eta or --etas")
    with open(args.samples, encoding="utf-8", newline="") as fh:
        modes, records = read_samples(fh)
    n0 = args.n0 if args.n0 is not None else default_truncation(records)
    if args.etas is not None:
        etas = [float(x) for x in args.etas.split(",")]
        if modes is not None and len(etas) != modes:
            raise ValueError(f"--etas has {len(etas)} entries for {modes} modes")
        policy = build_nonuniform_policy(args.r, args.r_prime, etas, n0)
    else:
        policy = build_policy(args.r, args.r_prime, args.eta, n0)
    rng = np.random.default_rng(args.seed)
    kept = list(apply_postselection(records, policy, rng, strict=args.strict))
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "retained.csv", "w", encoding="utf-8", newline="") as fh:
        if modes is not None:
            write_samples(fh, kept, modes)
    expected = sum(policy.pattern_probability(rec.pattern) for rec in records)
    report = {
        "input_rows": len(records),
        "retained_count": len(kept),
        "retained_fraction": len(kept) / len(records) if records else None,
        "expected_retained_fraction": expected / len(records) if records else None,
        "n0": n0,
        "c": policy.c,
        "eta": policy.eta,
        "eta_prime": policy.eta_prime,
        "policy_variant": policy.variant,
        "seed": args.seed,
    }
    _write_json(args.out / "report.json", report)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gbs", description="Lossy GBS post-selection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig2", help="maximum equivalent transmission sweeps")
    p.add_argument("--out", type=Path, required=True, help="output CSV")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("fig3", help="equivalent transmission and yield versus r'")
    p.add_argument("--variant", choices=("a", "b"), required=True)
    p.add_argument("--r-prime", type=float, help="evaluate a single r' instead of the grid")
    p.add_argument("--out", type=Path, required=True, help="output CSV")
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", help="classical-simulation error bound versus transmission")
    p.add_argument("--variant", choices=("a", "b"), required=True)
    p.add_argument("--out", type=Path, required=True, help="output CSV")
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("simulate", help="sample, detect and post-select a small experiment")
    p.add_argument("--config", type=Path, required=True, help="experiment JSON")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override run.rng_seed")
    p.add_argument("--cutoff", type=int, help="override run.cutoff")
    p.add_argument("--r-prime", type=float, help="override policy.r_prime (all squeezers)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("postselect", help="filter an existing sample CSV")
    p.add_argument("samples", type=Path, help="sample CSV (id,n_1..n_M,total,flags)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--r", type=float, help="squeezing of the experiment")
    p.add_argument("--r-prime", type=float, help="target squeezing")
    p.add_argument("--eta", type=float, help="uniform transmission")
    p.add_argument("--etas", help="comma-separated per-mode transmissions")
    p.add_argument("--n0", type=int, help="truncation photon number (default: largest total in the file)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="drop samples flagged saturated")
    p.set_defaults(func=cmd_postselect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_count()
        return args.func(args)
    except ScaleCapError as exc:
        print(f"gbs: scale limit: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except (ConfigError, ValueError, OSError) as exc:
        print(f"gbs: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
