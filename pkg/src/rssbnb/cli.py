"""Command-line entry points."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from .bench import METHODS, run_testbed
from .guidance import compute_rs_plan
from .instance import Instance, InstanceFormatError, load, toy_instance
from .sdp import Policy, solve_fixed_plan
from .search import BnBResult, DescentStrategy, bnb_solve, enumerate_baseline
from .simulator import simulate_policy


def _strategy(args, instance: Instance) -> DescentStrategy:
    if args.strategy == "det1":
        return DescentStrategy.deterministic(True)
    if args.strategy == "det0":
        return DescentStrategy.deterministic(False)
    if args.strategy == "rand":
        return DescentStrategy.randomized(args.seed)
    return DescentStrategy.guided(compute_rs_plan(instance), args.seed)


def _load(args) -> Instance:
    inst = load(args.instance)
    return inst.replace(epsilon=args.epsilon) if args.epsilon is not None else inst


def _fmt_plan(plan) -> str:
    return "(" + ",".join(str(g) for g in plan) + ")"


def result_document(res: BnBResult) -> dict:
    s = res.stats
    return {
        "plan": list(res.plan),
        "cost": res.cost,
        "policy": None if res.policy is None else [list(r) for r in res.policy.reviews],
        "stats": {
            "nodes_computed": s.nodes_computed,
            "nodes_pruned": s.nodes_pruned,
            "total_nodes": s.total_nodes,
            "pruning_pct_visited": s.pruning_pct_visited,
            "pruning_pct_fulltree": s.pruning_pct_fulltree,
            "incumbents": [[list(p), c] for p, c in s.incumbent_trace],
        },
    }


def _print_result(res: BnBResult, out):
    s = res.stats
    print(f"plan     {_fmt_plan(res.plan)}", file=out)
    print(f"cost     {res.cost:.4f}", file=out)
    if res.policy is not None:
        for t, lo, up in res.policy.reviews:
            rule = "no order" if lo is None else f"s={lo} S={up}"
            print(f"review   t={t} {rule}", file=out)
    print(f"nodes    {s.nodes_computed} computed, {s.nodes_pruned} pruned"
          f" ({s.nodes_pruned}/{s.total_nodes} = {s.pruning_pct_fulltree:.2f}%)", file=out)


def cmd_solve(args, out) -> int:
    inst = _load(args)
    res = bnb_solve(inst, _strategy(args, inst), use_mc_bounds=not args.no_bounds,
                    pairing=args.pairing)
    _print_result(res, out)
    if args.out:
        Path(args.out).write_text(json.dumps(result_document(res), indent=2) + "\n")
    return 0


def cmd_baseline(args, out) -> int:
    res = enumerate_baseline(_load(args))
    for plan, cost in sorted(res.all_costs.items()):
        print(f"{_fmt_plan(plan)}  {cost:.4f}", file=out)
    print(f"best {_fmt_plan(res.plan)}  {res.cost:.4f}", file=out)
    if args.out:
        Path(args.out).write_text(json.dumps({"plan": list(res.plan), "cost": res.cost}, indent=2) + "\n")
    return 0


def cmd_bench(args, out) -> int:
    methods = [m for m in args.methods.split(",") if m] if args.methods else []
    report = run_testbed(args.T, methods, args.out, seed=args.seed, workers=args.workers)
    if args.summary:
        Path(args.summary).write_text(report.summary_csv())
    if not args.out:
        out.write(report.to_csv())
    print(f"{len(report.rows)} rows", file=sys.stderr)
    return 0


def cmd_simulate(args, out) -> int:
    inst = _load(args)
    doc = json.loads(Path(args.policy).read_text())
    if doc.get("policy") is None:
        raise ValueError(f"{args.policy}: no (s, S) policy recorded")
    policy = Policy(tuple((int(t), s, S) for t, s, S in doc["policy"]))
    rep = simulate_policy(inst, policy, args.runs, args.seed)
    print(f"runs {rep.runs}  mean {rep.mean_cost:.4f}  se {rep.std_error:.4f}", file=out)
    if args.out:
        Path(args.out).write_text(json.dumps(
            {"runs": rep.runs, "mean_cost": rep.mean_cost, "std_error": rep.std_error}, indent=2) + "\n")
    return 0


def cmd_toy(args, out) -> int:
    inst = toy_instance()
    if args.epsilon is not None:
        inst = inst.replace(epsilon=args.epsilon)
    print("plan     expected cost", file=out)
    for plan in itertools.product((0, 1), repeat=inst.T):
        print(f"{_fmt_plan(plan)}  {solve_fixed_plan(inst, plan)[1]:9.1f}", file=out)
    res = bnb_solve(inst, _strategy(args, inst), use_mc_bounds=not args.no_bounds,
                    record_nodes=True, pairing=args.pairing)
    print("\nsearch trace (period, suffix, min C, bound, outcome)", file=out)
    for r in res.stats.nodes:
        if r.leaf_cost is not None:
            tag = f"leaf {r.leaf_cost:.1f}" + (" incumbent" if r.improved else "")
        else:
            tag = "pruned" if r.pruned else "branch"
        bound = "" if r.bound is None else f"{r.bound:.1f}"
        print(f"  t={r.period} {_fmt_plan(r.suffix):9} {r.stage_min:8.1f} {bound:>8} {tag}", file=out)
    print("incumbents " + " -> ".join(f"{c:.1f}" for _, c in res.stats.incumbent_trace), file=out)
    s = res.stats
    print(f"pruned {s.nodes_pruned}/{s.total_nodes} = {s.pruning_pct_fulltree:.2f}%", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rssbnb", description="(R, s, S) review planning by branch-and-bound")
    sub = p.add_subparsers(dest="command", required=True)

    def search_flags(sp):
        sp.add_argument("--strategy", choices=("det1", "det0", "rand", "guided"), default="det1")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--no-bounds", action="store_true")
        sp.add_argument("--pairing", choices=("expected", "closing"), default="expected")

    sp = sub.add_parser("solve", help="branch-and-bound on an instance file")
    sp.add_argument("instance")
    search_flags(sp)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--out", help="write plan, cost, policy and stats as JSON")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("baseline", help="solve every review plan")
    sp.add_argument("instance")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("bench", help="factorial testbed to CSV")
    sp.add_argument("--T", type=int, default=10)
    sp.add_argument("--methods", default="bnb,bnb-guided",
                    help=f"comma-separated subset of {','.join(METHODS)}; empty for none")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="CSV path; stdout if omitted")
    sp.add_argument("--summary", help="write per-factor means to this CSV")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("simulate", help="Monte Carlo cost of a solved policy")
    sp.add_argument("instance")
    sp.add_argument("policy", help="JSON written by solve --out")
    sp.add_argument("--runs", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("toy", help="three-period worked example")
    search_flags(sp)
    sp.add_argument("--epsilon", type=float)
    sp.set_defaults(func=cmd_toy)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except InstanceFormatError as exc:
        print(f"error: {args.instance}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
