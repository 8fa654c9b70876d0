"""``multicover`` command line: solve, gen, verify, bench.

Exit codes: 0 success, 1 usage, 2 parse/validation or I/O, 3 infeasible
instance, 4 property failure, 5 oracle timeout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bench import ALGORITHMS, report_json, run_bench, solve_instance, write_bench
from .generators import CONSTRAINTS, FAMILIES, GenerationError, GenSpec, generate_flat, write_corpus
from .hypergraph import InfeasibleInstanceError, InvalidHypergraphError
from .instance_io import InstanceParseError, list_corpus, read_instance
from .lp import build_relaxation, write_lp
from .oracle import DEFAULT_BUDGET
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_PROPERTY, EXIT_TIMEOUT = range(6)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    # Accepted before or after the subcommand; the subcommand copy only
    # overrides when given.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    env = os.environ.get("MULTICOVER_SEED")
    p.add_argument("--seed", type=_seed, default=d(_seed(env) if env else 0), help="RNG seed (default $MULTICOVER_SEED or 0)")
    p.add_argument("--format", choices=("text", "json"), default=d("text"))
    p.add_argument("--exact-lp", action="store_true", default=d(False), help="solve LPs in exact rational arithmetic")
    p.add_argument("--jobs", type=_positive, default=d(1), help="worker processes")
    p.add_argument("--timing", action="store_true", default=d(False), help="include wall times (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multicover", description="Set multicover approximation toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance and print a ratio report")
    _global_flags(s, suppress=True)
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGORITHMS, default="alg1")
    s.add_argument("--order", choices=("input", "size", "random"), default="input", help="edge order for the greedy k-matching")
    s.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help="oracle node budget")
    s.add_argument("--no-oracle", action="store_true", help="skip the exact optimum (not for --algo exact)")
    s.add_argument("--dump-lp", metavar="FILE", help="write the LP relaxation in CPLEX LP format")
    s.add_argument("--out", metavar="FILE", help="also write the report as JSON")

    g = sub.add_parser("gen", help="generate a seeded corpus")
    _global_flags(g, suppress=True)
    g.add_argument("--family", choices=FAMILIES, default="random")
    g.add_argument("--n", type=_positive, default=8)
    g.add_argument("--m", type=_positive, default=12)
    g.add_argument("--ell", type=_positive, nargs=2, default=(2, 4), metavar=("MIN", "MAX"))
    g.add_argument("--b", type=_positive, nargs=2, default=(2, 3), metavar=("MIN", "MAX"))
    g.add_argument("--epsilon", type=Fraction, default=Fraction(1, 2))
    g.add_argument("--constraint", action="append", choices=CONSTRAINTS, default=[])
    g.add_argument("--retries", type=_positive, default=100)
    g.add_argument("--count", type=_positive, default=10)
    g.add_argument("--out", required=True, metavar="DIR")

    v = sub.add_parser("verify", help="run a property suite")
    _global_flags(v, suppress=True)
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--corpus", help="instance directory, or a generator family (random, near-uniform)")
    v.add_argument("--trials", type=_positive, default=10_000, help="Monte-Carlo trials (rounding)")
    v.add_argument("--count", type=_positive, default=50, help="generated instances when no directory is given")
    v.add_argument("--max-m", type=_positive, default=12, help="edge limit for exhaustive checks")
    v.add_argument("--out", metavar="FILE", help="write the JSON summary here")

    b = sub.add_parser("bench", help="ratio reports over a corpus")
    _global_flags(b, suppress=True)
    b.add_argument("--corpus", required=True, metavar="DIR")
    b.add_argument("--algos", default="threshold,alg1,duality", help="comma-separated subset of: " + ",".join(ALGORITHMS))
    b.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    b.add_argument("--out", required=True, metavar="PATH", help="writes PATH.csv and PATH.json")
    return parser


def _print_kv(d: dict) -> None:
    width = max((len(k) for k in d), default=0)
    for k, val in d.items():
        print(f"{k:<{width}}  {'' if val is None else val}")


def cmd_solve(args) -> int:
    h = read_instance(args.instance)
    if args.dump_lp:
        write_lp(build_relaxation(h), args.dump_lp)
    report, cover = solve_instance(
        h,
        args.algo,
        Path(args.instance).stem,
        args.seed,
        args.exact_lp,
        use_oracle=not args.no_oracle,
        budget=args.budget,
        order=args.order,
    )
    payload = report_json(report, args.timing)
    payload["cover"] = [j + 1 for j in cover.chosen]
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        row = report.row(args.timing)
        row["cover"] = " ".join(str(j + 1) for j in cover.chosen)
        _print_kv(row)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.algo == "exact" and report.opt_timed_out:
        print(f"oracle budget exhausted: Opt in [{report.opt_lower}, {report.size}]", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GenSpec(
        family=args.family,
        n=args.n,
        m=args.m,
        ell_range=tuple(args.ell),
        b_range=tuple(args.b),
        epsilon=args.epsilon,
        constraints=frozenset(args.constraint),
        seed=args.seed,
        retries=args.retries,
    )
    out = Path(args.out)
    manifest = write_corpus(spec, args.count, out)
    if args.family == "flat":
        # Keep the fractional points next to the instances.
        data = json.loads(manifest.read_text())
        for i, entry in enumerate(data["instances"]):
            _, point = generate_flat(replace(spec, seed=spec.seed + i))
            stem = Path(entry["file"]).stem
            (out / f"{stem}.point.json").write_text(json.dumps({"x": [str(v) for v in point.x]}) + "\n")
            entry["point"] = f"{stem}.point.json"
        manifest.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    if args.format == "json":
        print(json.dumps({"manifest": str(manifest), "count": args.count}, sort_keys=True))
    else:
        print(f"wrote {args.count} instances to {out} (manifest {manifest.name})")
    return EXIT_OK


def _emit_summary(summary: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(summary, indent=2, sort_keys=True))
        return
    print(f"suite {summary['suite']}: {summary['instances']} instances, seed {summary['seed']}")
    for p in summary["properties"]:
        status = "PASS" if p["passed"] else "FAIL"
        if not p["checked"]:
            status = "N/A "
        print(f"  {status}  {p['name']}  ({p['checked'] - p['failed']}/{p['checked']})")
        for f in p["failures"]:
            print(f"        {f}")
    print("PASSED" if summary["passed"] else "FAILED")


def cmd_verify(args) -> int:
    instances, family = None, None
    if args.corpus:
        path = Path(args.corpus)
        if path.is_dir():
            instances = [(p.stem, read_instance(p)) for p in list_corpus(path)]
        elif args.corpus in ("random", "near-uniform"):
            family = args.corpus
        else:
            print(f"no such corpus: {args.corpus}", file=sys.stderr)
            return EXIT_PARSE
    summary = run_suite(
        args.suite,
        instances,
        seed=args.seed,
        trials=args.trials,
        jobs=args.jobs,
        count=args.count,
        max_m=args.max_m,
        family=family,
    )
    if not summary["instances"]:
        print("warning: no instances to check", file=sys.stderr)
    _emit_summary(summary, args.format)
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if summary["passed"] else EXIT_PROPERTY


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown or not algos:
        print(f"unknown algorithms: {', '.join(unknown) or '(none given)'}", file=sys.stderr)
        return EXIT_USAGE
    if not Path(args.corpus).is_dir():
        print(f"no such corpus directory: {args.corpus}", file=sys.stderr)
        return EXIT_PARSE
    result = run_bench(args.corpus, algos, args.seed, args.jobs, args.exact_lp, args.budget)
    if not result.rows and not result.errors:
        print("warning: empty corpus, empty report written", file=sys.stderr)
    csv_path, json_path = write_bench(result, args.out, args.seed, args.timing)
    if args.format == "json":
        print(json.dumps({"csv": str(csv_path), "json": str(json_path), "summary": result.summary}, indent=2, sort_keys=True))
    else:
        print(f"{len(result.rows)} rows, {len(result.errors)} errors -> {csv_path}, {json_path}")
        for algo, s in result.summary.items():
            print(f"  {algo}: max ratio {s['max_ratio_opt']}, bounds violated {s['bounds_violated']}/{s['bounds_checked']}")
    for e in result.errors:
        print(f"error: {e['instance']} {e['algorithm']}: {e['error']}", file=sys.stderr)
    if not result.roundtrip_ok:
        print("round-trip recomputation disagreed with the report", file=sys.stderr)
        return EXIT_PROPERTY
    violated = sum(s["bounds_violated"] for s in result.summary.values())
    return EXIT_PROPERTY if violated else EXIT_OK


COMMANDS = {"solve": cmd_solve, "gen": cmd_gen, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except InfeasibleInstanceError as exc:
        print(f"infeasible instance: {'; '.join(exc.violations)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InstanceParseError, InvalidHypergraphError) as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
