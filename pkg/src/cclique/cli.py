"""Command line: ``cclique run|sweep|verify|gen``.

Exit codes: 0 success, 1 a verification failed, 2 bad configuration,
3 a capacity or feasibility limit was hit inside the simulation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SimConfig
from .errors import BudgetInfeasible, ColoringOverflow, ConfigError, DegreeTooHigh, RoutingCapacityExceeded
from .harness import ALGORITHMS, INSTANCE_KIND, ExperimentConfig, run, sweep, sweep_csv, to_jsonl, verify_record
from .metric import InstanceSpec, generate

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
CAPACITY_ERRORS = (RoutingCapacityExceeded, BudgetInfeasible, DegreeTooHigh, ColoringOverflow)


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"7"``, ``"0..49"`` (inclusive) or ``"1,4,9"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc


def parse_ints(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _common(p: argparse.ArgumentParser, n_list: bool = False) -> None:
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    if n_list:
        p.add_argument("--n", type=parse_ints, default=[], help="comma-separated sizes")
    else:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--p", type=float, default=0.1, help="edge probability for ruling3 instances")
    p.add_argument("--r", type=float, default=0.05, dest="radius", help="threshold radius for mis")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", type=parse_seeds, default=None, help="7, 0..49 or 1,4,9")
    p.add_argument("--c1", type=float, default=2.0)
    p.add_argument("--c2", type=float, default=5.0)
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--lenzen-rounds", type=int, default=2)
    p.add_argument("--swmis-rounds", type=int, default=4)
    p.add_argument("--bandwidth", type=int, default=1, help="words per direct message")
    p.add_argument("--charge", choices=("max", "sum"), default="max", help="parallel block round charge")
    p.add_argument("--sw-strategy", choices=("oracle", "faithful"), default="oracle")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cclique", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    p_run = sub.add_parser("run", help="per-seed JSON-lines records plus an aggregate row")
    _common(p_run)
    p_run.add_argument("--format", choices=("jsonl",), default="jsonl")
    p_sweep = sub.add_parser("sweep", help="scaling table over several n")
    _common(p_sweep, n_list=True)
    p_sweep.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_verify = sub.add_parser("verify", help="re-check stored records against the oracles")
    p_verify.add_argument("path")
    p_gen = sub.add_parser("gen", help="emit one instance as JSON")
    p_gen.add_argument("--kind", choices=("euclidean", "gnp"), default=None)
    p_gen.add_argument("--algo", choices=ALGORITHMS, default=None, help="pick the kind this algorithm uses")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--dim", type=int, default=2)
    p_gen.add_argument("--p", type=float, default=0.1)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default="-")
    return parser


def _config(args, n: int) -> ExperimentConfig:
    seeds = args.seeds if args.seeds is not None else ((args.seed,) if args.seed is not None else (0,))
    sim = SimConfig(
        bandwidth_words=args.bandwidth,
        lenzen_rounds=args.lenzen_rounds,
        swmis_rounds=args.swmis_rounds,
        rho=args.rho,
        c1=args.c1,
        c2=args.c2,
        parallel_charge=args.charge,
        sw_strategy=args.sw_strategy,
    )
    return ExperimentConfig(args.algo, n, tuple(seeds), dim=args.dim, p=args.p, radius=args.radius, sim=sim)


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.verb == "gen":
            kind = args.kind or (INSTANCE_KIND[args.algo] if args.algo else "euclidean")
            inst = generate(InstanceSpec(kind, args.n, args.seed, dim=args.dim, p=args.p))
            _write(inst.to_json() + "\n", args.out)
            return EXIT_OK
        if args.verb == "verify":
            with open(args.path, encoding="utf-8") as fh:
                records = [json.loads(line) for line in fh if line.strip()]
            bad = 0
            for rec in records:
                if rec.get("aggregate"):
                    continue
                ok = verify_record(rec)
                bad += not ok
                print(f"{rec['algo']} n={rec['n']} seed={rec['seed']}: {'ok' if ok else 'FAILED'}")
            return EXIT_VERIFY if bad else EXIT_OK
        if args.verb == "run":
            cfg = _config(args, args.n)
            records, agg = run(cfg, args.jobs)
            _write(to_jsonl(records + [agg]), args.out)
            return EXIT_OK if all(r["passed"] for r in records) else EXIT_VERIFY
        cfg = _config(args, max(args.n, default=1))
        rows = sweep(cfg, args.n, args.jobs)
        _write(sweep_csv(rows) if args.format == "csv" else to_jsonl(rows), args.out)
        return EXIT_OK if all(r["pass_rate"] == 1.0 for r in rows) else EXIT_VERIFY
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CAPACITY_ERRORS as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
