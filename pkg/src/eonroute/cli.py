"""Command-line entry points.

Exit codes: 0 success, 1 demand blocked, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from . import sim
from .baselines import edge_disjoint_paths, route_over_candidates, yen_ksp
from .policies import POLICIES, get_policy
from .routing import Demand, search
from .topology import Multigraph, population_stats

EXIT_OK, EXIT_BLOCKED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _area(text: str) -> tuple[float, float]:
    try:
        return sim.parse_area(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_graph(path: str) -> Multigraph:
    try:
        with open(path, encoding="utf-8") as fh:
            return Multigraph.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _edge_label(e: int) -> str:
    # arcs are shown 1-based, e1 being the first arc of the file
    return f"e{e + 1}"


# ---------------------------------------------------------------------------


def cmd_route(args) -> int:
    g = _load_graph(args.graph)
    try:
        d = Demand(args.source, args.target, args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if not (0 <= d.source < g.node_count and 0 <= d.target < g.node_count):
        raise InputError("source/target not in graph")
    if args.limit_km <= 0:
        raise InputError("--limit-km must be positive")
    if args.router == "proposed":
        res = search(g, d, args.limit_km)
    else:
        gen = yen_ksp(g, d.source, d.target, args.k) if args.router == "yenksp" else edge_disjoint_paths(g, d.source, d.target)
        res = route_over_candidates(g, gen, d, args.limit_km)
    if res is None:
        print("BLOCKED")
        return EXIT_BLOCKED
    slot = get_policy(args.policy)(res.sigma, d.n)
    hops = " ".join(_edge_label(e) for e in res.path)
    cost = int(res.cost) if float(res.cost).is_integer() else res.cost
    print(f"{hops} | cost {cost} | sigma {res.sigma.format()} | slot {slot.start}-{slot.start + slot.length - 1}")
    return EXIT_OK


def cmd_generate(args) -> int:
    net = sim.NetworkConfig(nodes=args.nodes, width=args.area[0], height=args.area[1], slices=args.slices)
    g = net.generate(args.seed)
    text = g.dumps()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.graph:
        graphs = [_load_graph(path) for path in args.graph]
    else:
        net = sim.NetworkConfig(nodes=args.nodes, width=args.area[0], height=args.area[1], slices=args.slices)
        graphs = [net.generate(sim._derive_seed(args.seed, 1, i)) for i in range(args.count)]
    stats = population_stats(graphs)
    print(stats.table())
    longest = stats.sp_length.max
    if not math.isnan(longest) and longest >= args.limit_km:
        print(f"warning: longest shortest path {longest:g} km reaches the {args.limit_km:g} km limit", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    net = sim.NetworkConfig(
        nodes=args.nodes,
        width=args.area[0],
        height=args.area[1],
        slices=args.slices,
        limit_km=args.limit_km,
        k=args.k,
    )
    cfg = sim.TrafficConfig(lam=args.lam, holding_days=args.holding_days, mean_slices=args.mean_slices, days=args.days)
    spec = sim.CampaignSpec(seed=args.seed, net=net)
    res = sim.run(
        spec.graph_seed(args.sample),
        spec.traffic_seed(args.sample, args.lam),
        args.router,
        args.policy,
        cfg,
        net=net,
        timing=args.timing,
        debug=args.debug,
    )
    if args.daily:
        import csv
        from dataclasses import astuple, fields

        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["day"] + [f.name for f in fields(sim.DailyMetrics)])
        for day, d in enumerate(res.days, 1):
            w.writerow([day] + [repr(x) if isinstance(x, float) else x for x in astuple(d)])
    else:
        print(f"router {res.router}  policy {res.policy}  lambda {res.lam:g}  attempted {res.attempted}  established {res.established}")
        for name in sim.METRICS:
            print(f"{name:<24}{res.summary[name]!r}")
    return EXIT_OK


def cmd_campaign(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.config}: {exc.strerror}") from None
    try:
        spec = sim.parse_campaign_config(text, seed=args.seed, samples=args.samples, timing=args.timing or None)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{args.config}: {exc}") from None
    try:
        out = open(args.out, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror}") from None

    npops = len(spec.populations())

    def progress(done: int, total: int) -> None:
        if not args.quiet:
            print(f"\r{done}/{total} runs", end="" if done < total else "\n", file=sys.stderr, flush=True)

    print(f"{npops} populations x {spec.samples} samples, {args.jobs} worker(s)", file=sys.stderr)
    with out:
        results = sim.campaign(spec, jobs=args.jobs, progress=progress)
        sim.write_csv(results, out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_network_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", type=_positive_int, default=100)
    p.add_argument("--area", type=_area, default=(1000.0, 1000.0), help="WIDTHxHEIGHT in km")
    p.add_argument("--slices", type=_positive_int, default=400, help="slices per link")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eonroute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="route one demand on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("-s", "--source", type=int, required=True)
    p.add_argument("-t", "--target", type=int, required=True)
    p.add_argument("-n", type=int, required=True, help="contiguous slices required")
    p.add_argument("--limit-km", type=float, default=2000.0)
    p.add_argument("--router", choices=sim.ROUTERS, default="proposed")
    p.add_argument("--policy", choices=sorted(POLICIES), default="first")
    p.add_argument("--k", type=_positive_int, default=10)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("generate", help="write a random Gabriel graph file")
    _add_network_flags(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="Gabriel graph statistics table")
    p.add_argument("--graph", action="append", help="graph file (repeatable); otherwise generate")
    _add_network_flags(p)
    p.add_argument("--count", type=_positive_int, default=50, help="graphs to generate")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--limit-km", type=float, default=2000.0)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="one simulation run")
    _add_network_flags(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sample", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=35.0, help="arrivals per day")
    p.add_argument("--holding-days", type=float, default=10.0)
    p.add_argument("--mean-slices", type=float, default=10.0)
    p.add_argument("--days", type=_positive_int, default=100)
    p.add_argument("--router", choices=sim.ROUTERS, default="proposed")
    p.add_argument("--policy", choices=sorted(POLICIES), default="fittest")
    p.add_argument("--limit-km", type=float, default=2000.0)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--timing", action="store_true", help="measure wall-clock search time")
    p.add_argument("--debug", action="store_true", help="check slice conservation at every event")
    p.add_argument("--daily", action="store_true", help="print per-day metrics as CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("campaign", help="run a population grid and write CSV")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--timing", action="store_true", help="record wall-clock search time (breaks byte-identical output)")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
