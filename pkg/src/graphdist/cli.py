"""Command-line interface.

Exit codes: 0 success; 1 domain answer "invalid/false"; 2 usage or input
format error; 3 enumeration/search budget exceeded. Results go to
stdout, diagnostics to stderr. Identical invocations produce identical
bytes (timing lines are suppressed under --deterministic).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import distances as dist
from .errors import (
    BudgetExceededError,
    GraphdistError,
    InconsistentBackgroundError,
    InvalidGraphError,
    ParseError,
    UnsupportedClassError,
)
from .pdag import Pdag, parse_amat_csv, parse_graph, to_text
from .poset import neighbors, pseudo_neighbors
from .validity import GraphClassSpec, explain_invalid

METHODS = (
    "auto", "astar", "downup", "updown", "pseudo", "bruteforce",
    "shd1", "shd2", "lowerbound",
)

# mirrors bench.EXPERIMENTS; bench pulls in numpy/scipy, so it is imported
# only when the bench subcommand actually runs
EXPERIMENT_IDS = (
    "cpdag-allpairs-4",
    "cpdag-allpairs-5",
    "mpdag-polytree-allpairs-5",
    "poset-structure-table",
)


def _add_class_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--class", dest="klass", required=True,
        choices=("ug", "dag", "cpdag", "mpdag"), help="graph class",
    )
    p.add_argument(
        "--polytree", action="store_true",
        help="restrict to members with acyclic skeleton",
    )


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="graphdist",
        description="model-oriented distances between statistical graphs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check class membership of a graph file")
    _add_class_flags(p)
    p.add_argument("file")

    p = sub.add_parser("distance", help="distance between two graph files")
    _add_class_flags(p)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--heuristic", default="default",
                   help="a-star heuristic: default|none|skeleton|shd1|shd2")
    p.add_argument("--path", action="store_true", help="include a witness path")
    p.add_argument("--json", action="store_true", help="emit the full report")
    p.add_argument("file_a")
    p.add_argument("file_b")

    p = sub.add_parser("neighbors", help="covering neighbors of a graph")
    _add_class_flags(p)
    p.add_argument("--direction", choices=("up", "down", "both"), default="both")
    p.add_argument("--pseudo", action="store_true",
                   help="pseudo-rank covers (required for general MPDAGs)")
    p.add_argument("file")

    p = sub.add_parser("enumerate", help="enumerate all class members")
    _add_class_flags(p)
    p.add_argument("-n", type=int, required=True, help="vertex count")
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--out", help="write one graph file per member to this directory")

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("--experiment", required=True, choices=EXPERIMENT_IDS)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--csv", help="write per-pair records to this CSV path")
    p.add_argument("--summary", action="store_true",
                   help="print the aggregate summary (default behavior)")
    p.add_argument("--sample", type=int, default=None,
                   help="pair subsample size for the five-node sweep")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--full", action="store_true",
                   help="force the full pair sweep (slow at five nodes)")
    p.add_argument("--deterministic", action="store_true",
                   help="suppress timing fields")
    return ap


def _load_graph(path: str) -> Pdag:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path) as fh:
            text = fh.read()
    if path.endswith(".csv"):
        return parse_amat_csv(text)
    return parse_graph(text)


def _spec(args) -> GraphClassSpec:
    return GraphClassSpec(args.klass, polytree=args.polytree)


def _cmd_validate(args) -> int:
    g = _load_graph(args.file)
    reason = explain_invalid(g, _spec(args))
    if reason is None:
        print("valid")
        return 0
    print(f"invalid: {reason}")
    return 1


def _report_json(rep: dist.DistanceReport) -> dict:
    out = {
        "value": rep.value,
        "method": rep.method,
        "expansions": rep.expansions,
        "lower_bound": rep.lower_bound,
        "upper_bound": rep.upper_bound,
    }
    if rep.path is not None:
        out["path"] = [to_text(g) for g in rep.path]
    return out


def _cmd_distance(args) -> int:
    g1 = _load_graph(args.file_a)
    g2 = _load_graph(args.file_b)
    spec = _spec(args)
    method = args.method
    include_path = args.path
    if method == "shd1":
        rep = dist.DistanceReport(value=dist.shd1(g1, g2), method="shd1")
    elif method == "shd2":
        rep = dist.DistanceReport(value=dist.shd2(g1, g2), method="shd2")
    elif method == "lowerbound":
        rep = dist.DistanceReport(
            value=dist.cpdag_lower_bound(g1, g2), method="lowerbound"
        )
    elif method == "astar":
        rep = dist.model_distance(
            g1, g2, spec, heuristic=args.heuristic, include_path=include_path
        )
    elif method == "downup":
        rep = dist.down_up_distance(g1, g2, spec, include_path=include_path)
    elif method == "updown":
        rep = dist.up_down_distance(g1, g2, spec, include_path=include_path)
    elif method == "pseudo":
        if spec.kind != "mpdag":
            raise UnsupportedClassError("--method pseudo applies to MPDAGs")
        rep = dist.pseudo_distance(
            g1, g2, polytree=spec.polytree, include_path=include_path
        )
    elif method == "bruteforce":
        rep = dist.brute_force_distance(g1, g2, spec)
    else:
        rep = dist.auto_distance(g1, g2, spec, include_path=include_path)
    if args.json:
        print(json.dumps(_report_json(rep), indent=2, sort_keys=True))
    else:
        print(rep.value)
        if include_path and rep.path is not None:
            for g in rep.path:
                print()
                sys.stdout.write(to_text(g))
    return 0


def _cmd_neighbors(args) -> int:
    g = _load_graph(args.file)
    spec = _spec(args)
    if spec.kind == "mpdag" and not spec.polytree and not args.pseudo:
        raise UnsupportedClassError(
            "general MPDAGs have no covering characterization; "
            "pass --pseudo for pseudo-rank covers"
        )
    if args.pseudo:
        if spec.kind != "mpdag":
            raise UnsupportedClassError("--pseudo applies to MPDAGs")
        ns = pseudo_neighbors(g, polytree=spec.polytree)
    else:
        ns = neighbors(g, spec)
    blocks = []
    if args.direction in ("up", "both"):
        blocks.extend(ns.up)
    if args.direction in ("down", "both"):
        blocks.extend(ns.down)
    print(f"# {len(ns.up)} up, {len(ns.down)} down")
    for h in blocks:
        print()
        sys.stdout.write(to_text(h))
    return 0


def _cmd_enumerate(args) -> int:
    from .catalog import enumerate_class

    catalog = enumerate_class(_spec(args), args.n)
    if args.count_only:
        print(len(catalog.members))
        return 0
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        width = len(str(len(catalog.members) - 1))
        for i, g in enumerate(catalog.members):
            name = f"{catalog.spec.label()}-n{args.n}-{i:0{width}d}.graph"
            with open(os.path.join(args.out, name), "w") as fh:
                fh.write(to_text(g))
        print(len(catalog.members))
        return 0
    for i, g in enumerate(catalog.members):
        if i:
            print()
        sys.stdout.write(to_text(g))
    return 0


def _cmd_bench(args) -> int:
    from . import bench as bench_mod

    rep = bench_mod.run_experiment(
        args.experiment,
        threads=args.threads,
        sample=args.sample,
        seed=args.seed if args.seed is not None else bench_mod.DEFAULT_SEED,
        full=args.full,
    )
    if args.csv:
        bench_mod.report_to_csv(rep, args.csv)
        print(f"wrote {args.csv}", file=sys.stderr)
    sys.stdout.write(bench_mod.summarize(rep, deterministic=args.deterministic))
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "distance": _cmd_distance,
    "neighbors": _cmd_neighbors,
    "enumerate": _cmd_enumerate,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvalidGraphError, InconsistentBackgroundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UnsupportedClassError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GraphdistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
