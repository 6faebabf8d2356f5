"""Command line front end.

Exit codes: 0 success, 1 infeasible instance (or a failed ``verify``),
2 usage or input error, 3 time limit reached with an incumbent.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys

from .bitset import bits
from .instance import CONVENTIONS, Instance, ScoreFileError, format_scores, load_scores, serialize
from .oracle import brute_force_optimum
from .scorer import local_scores, read_csv
from .search import SolverConfig, solve

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_TIMEOUT = 3
VERIFY_MAX_N = 6


def format_cost(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def render_text(instance: Instance, result) -> str:
    lines = [f"status: {result.status}"]
    if result.incumbent is not None:
        lines.append(f"cost: {format_cost(result.cost)}")
        for v, parents in enumerate(result.network):
            names = " ".join(instance.names[p] for p in bits(parents))
            lines.append(f"{instance.names[v]} <- {names}".rstrip())
    return "\n".join(lines) + "\n"


def render_dot(instance: Instance, result) -> str:
    lines = ["digraph bn {"]
    for name in instance.names:
        lines.append(f'  "{name}";')
    for v, parents in enumerate(result.network or ()):
        for p in bits(parents):
            lines.append(f'  "{instance.names[p]}" -> "{instance.names[v]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_csv(instance: Instance, result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "parents", "score"])
    for v, parents in enumerate(result.network or ()):
        i = instance.masks[v].index(parents)
        w.writerow([
            instance.names[v],
            " ".join(instance.names[p] for p in bits(parents)),
            format_cost(instance.scores[v][i]),
        ])
    return buf.getvalue()


RENDERERS = {"text": render_text, "dot": render_dot, "csv": render_csv}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnsl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="learn a minimum-cost network from a score file")
    p.add_argument("scores")
    p.add_argument("--time-limit", type=float, default=None, metavar="SEC")
    p.add_argument("--no-gac", action="store_true", help="checker-only acyclicity consistency")
    p.add_argument("--cluster-order", choices=["heuristic", "chrono"], default="heuristic")
    p.add_argument("--no-minimise", action="store_true", help="keep clusters unminimised")
    p.add_argument("--score-convention", choices=CONVENTIONS, default="auto")
    p.add_argument("--out", choices=sorted(RENDERERS), default="text")
    p.add_argument("--stats-json", metavar="PATH")
    p.add_argument("--lb-every-k", type=int, default=1, metavar="N")
    p.add_argument("--pool-max", type=int, default=None, metavar="N")

    p = sub.add_parser("score", help="compute BIC local scores from a CSV dataset")
    p.add_argument("csv")
    p.add_argument("--max-parents", type=int, required=True, metavar="K")
    p.add_argument("--out", required=True, metavar="SCOREFILE")

    p = sub.add_parser("verify", help="cross-check solve against brute force (n <= 6)")
    p.add_argument("scores")
    p.add_argument("--score-convention", choices=CONVENTIONS, default="auto")

    p = sub.add_parser("generate", help="write a random cost-convention score file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=8, help="maximum domain size")
    p.add_argument("--max-score", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="SCOREFILE")
    return parser


def _solve(args) -> int:
    instance = load_scores(args.scores, args.score_convention)
    if args.lb_every_k < 1:
        raise ValueError("--lb-every-k must be >= 1")
    config = SolverConfig(
        time_limit=args.time_limit,
        gac=not args.no_gac,
        cluster_order=args.cluster_order,
        minimise=not args.no_minimise,
        lb_every_k=args.lb_every_k,
        pool_max=args.pool_max,
    )
    result = solve(instance, config)
    if result.status == "infeasible":
        sys.stdout.write(render_text(instance, result))
    else:
        sys.stdout.write(RENDERERS[args.out](instance, result))
    if args.stats_json:
        with open(args.stats_json, "w") as fh:
            json.dump(result.stats, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "timeout": EXIT_TIMEOUT}[result.status]


def _score(args) -> int:
    data = read_csv(args.csv)
    domains = local_scores(data, args.max_parents)
    with open(args.out, "w") as fh:
        fh.write(format_scores(data.names, domains))
    total = sum(len(d) for d in domains)
    print(f"wrote {total} parent sets for {data.n} variables to {args.out}")
    return EXIT_OK


def _verify(args) -> int:
    instance = load_scores(args.scores, args.score_convention)
    if instance.n > VERIFY_MAX_N:
        print(f"verify supports at most {VERIFY_MAX_N} variables, got {instance.n}", file=sys.stderr)
        return EXIT_USAGE
    result = solve(instance)
    oracle = brute_force_optimum(instance)
    if oracle is None and result.status == "infeasible":
        print("MATCH infeasible")
        return EXIT_OK
    got = format_cost(result.cost)
    want = format_cost(oracle.cost) if oracle else "infeasible"
    if oracle is not None and result.cost == oracle.cost:
        print(f"MATCH solver={got} oracle={want}")
        return EXIT_OK
    print(f"MISMATCH solver={got} oracle={want}")
    return EXIT_INFEASIBLE


def _generate(args) -> int:
    from .generators import random_instance

    instance = random_instance(random.Random(args.seed), args.n, args.d, args.max_score)
    with open(args.out, "w") as fh:
        fh.write(serialize(instance))
    return EXIT_OK


COMMANDS = {"solve": _solve, "score": _score, "verify": _verify, "generate": _generate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ScoreFileError, ValueError) as exc:
        print(f"bnsl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
