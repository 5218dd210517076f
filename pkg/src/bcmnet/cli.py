"""Command-line entry point: ``bcmnet analyze|generate|rewire|simulate|sweep``.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
domain errors (disconnected topology, no removable edge, ...).
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import ExperimentConfig, parse_int_list, read_config
from .errors import BcmNetError, DomainError, UsageError
from .generators import (
    BaParams,
    WaxmanParams,
    generate_barabasi_albert,
    generate_waxman,
    load_topology,
    save_topology,
    split_in_two,
)
from .rewire import RewireConfig, rewire_until
from .routing import RoutingParams
from .simulate import (
    SimConfig,
    TwoSubnetTraffic,
    UniformTraffic,
    all_candidates,
    holding_time_for_load,
    mean_ci95,
    offered_load,
    run_simulation,
)
from .topology import hop_matrix, topology_stats

log = logging.getLogger("bcmnet")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3

RUN_COLUMNS = [
    "row_type", "topology_name", "algorithm", "traffic", "load_rho", "mean_holding_time",
    "seed", "requests", "accepted", "rejected", "flow_bp", "bw_bp",
    "mean", "ci95_low", "ci95_high", "n_seeds", "error",
]


def fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def _write_csv(rows, columns, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# --- analyze ---------------------------------------------------------------


def cmd_analyze(args) -> int:
    rows = []
    for path in args.topology:
        t = load_topology(path)
        s = topology_stats(t, hop_matrix(t))
        rows.append({
            "topology_name": Path(path).stem,
            "N": s.node_count,
            "L": s.link_count,
            "links_per_node": s.links_per_node,
            "avg_degree": s.avg_degree_undirected,
            "avg_path_length": s.avg_path_length,
            "diameter": s.diameter,
            "clustering_coefficient": s.clustering_coefficient,
            "bcm": s.bcm,
        })
    _write_csv(rows, list(rows[0]), args.out)
    return EXIT_OK


# --- generate --------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.kind == "waxman":
        if args.links is None:
            raise UsageError("waxman needs --links")
        t = generate_waxman(WaxmanParams(
            node_count=args.nodes, target_links=args.links, alpha=args.alpha,
            beta=args.beta, plane_size=args.plane_size, seed=args.seed,
        ))
    else:
        t = generate_barabasi_albert(BaParams(args.nodes, args.m, args.m0, args.seed))
    if args.out:
        save_topology(t, args.out)
    else:
        sys.stdout.write(f"{t.node_count} {t.link_count}\n")
        sys.stdout.writelines(f"{u} {v}\n" for u, v in t.edges)
    return EXIT_OK


# --- rewire ----------------------------------------------------------------


def cmd_rewire(args) -> int:
    t = load_topology(args.topology)
    cfg = RewireConfig(
        max_steps=args.max_steps,
        target_bcm=args.target_bcm,
        candidate_budget=args.candidate_budget,
        keep_path_length=not args.allow_path_growth,
    )
    result, trace = rewire_until(t, cfg)
    if args.out:
        save_topology(result, args.out)
    rows = [
        {
            "step": i,
            "removed_u": s.removed_edge[0], "removed_v": s.removed_edge[1],
            "added_u": s.added_edge[0], "added_v": s.added_edge[1],
            "bcm_before": s.bcm_before, "bcm_after": s.bcm_after,
        }
        for i, s in enumerate(trace, start=1)
    ]
    columns = ["step", "removed_u", "removed_v", "added_u", "added_v", "bcm_before", "bcm_after"]
    if args.trace or not args.out:
        _write_csv(rows, columns, args.trace)
    return EXIT_OK


# --- simulate / sweep ------------------------------------------------------


def _routing_from_args(args, base: dict | None = None) -> dict:
    params = dict(base or {})
    for key in ("max_credits", "phi", "window", "credit_rule", "gamma_hat", "psi",
                "observation_period_cycles", "max_per_class"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def _sim_from_args(args, base: dict | None = None) -> dict:
    params = dict(base or {})
    for key in ("lambda_per_source", "bw_min", "bw_max", "link_capacity",
                "warmup_requests", "total_requests"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def _traffic(kind: str, labels_text: str, intra_weight: float, t):
    if kind == "uniform":
        return UniformTraffic()
    if labels_text == "auto":
        labels = split_in_two(t, intra_weight)
    else:
        labels = tuple(int(x) for x in labels_text.replace(" ", "").split(","))
    return TwoSubnetTraffic(labels, intra_weight)


def cmd_simulate(args) -> int:
    t = load_topology(args.topology)
    if (args.load is None) == (args.holding_time is None):
        raise UsageError("give exactly one of --load and --holding-time")
    cfg = SimConfig(
        algorithm=args.algorithm.upper(),
        routing=RoutingParams(**_routing_from_args(args)),
        mean_holding_time=args.holding_time,
        target_load=args.load,
        seed=args.seed,
        traffic=_traffic(args.traffic, args.subnet_labels, args.intra_weight, t),
        **_sim_from_args(args),
    )
    cfg.validate()
    stats = topology_stats(t)
    hold = args.holding_time or holding_time_for_load(args.load, stats, cfg)
    r = run_simulation(t, cfg)
    row = {
        "row_type": "run", "topology_name": Path(args.topology).stem,
        "algorithm": cfg.algorithm, "traffic": cfg.traffic.name,
        "load_rho": offered_load(hold, stats, cfg), "mean_holding_time": hold,
        "seed": args.seed, "requests": r.requests, "accepted": r.accepted,
        "rejected": r.rejected, "flow_bp": r.flow_bp, "bw_bp": r.bw_bp,
    }
    _write_csv([row], RUN_COLUMNS[:12], args.out)
    return EXIT_OK


def _sweep_cell(job):
    key, t, cfg, candidates = job
    try:
        return key, run_simulation(t, cfg, candidates), None
    except BcmNetError as exc:
        return key, None, f"{type(exc).__name__}: {exc}"


def _experiment_from_args(args) -> ExperimentConfig:
    values = read_config(args.config) if args.config else {}
    exp = ExperimentConfig.from_mapping(values)
    if args.topology:
        exp.topology = args.topology
    if args.name:
        exp.name = args.name
    if args.algorithms:
        exp.algorithms = [a.strip().upper() for a in args.algorithms.split(",") if a.strip()]
    if args.loads:
        exp.loads, exp.holding_times = [float(x) for x in args.loads.split(",")], []
    if args.holding_times:
        exp.holding_times, exp.loads = [float(x) for x in args.holding_times.split(",")], []
    if args.seeds is not None:
        exp.seeds = parse_int_list(args.seeds)
    if args.traffic:
        exp.traffic = args.traffic
    if args.subnet_labels:
        exp.subnet_labels = args.subnet_labels
    if args.intra_weight is not None:
        exp.intra_weight = args.intra_weight
    if args.workers is not None:
        exp.workers = args.workers
    if args.out:
        exp.out = args.out
    exp.routing = _routing_from_args(args, exp.routing)
    exp.sim = _sim_from_args(args, exp.sim)
    exp.validate()
    return exp


def cmd_sweep(args) -> int:
    exp = _experiment_from_args(args)
    t = load_topology(exp.topology)
    name = exp.name or Path(exp.topology).stem
    stats = topology_stats(t)
    routing = exp.routing_params()
    base = SimConfig(
        routing=routing,
        mean_holding_time=1.0,
        traffic=_traffic(exp.traffic, exp.subnet_labels, exp.intra_weight, t),
        **exp.sim,
    )
    if exp.loads:
        levels = [(rho, holding_time_for_load(rho, stats, base)) for rho in exp.loads]
    else:
        levels = [(offered_load(h, stats, base), h) for h in exp.holding_times]
    candidates = all_candidates(t, hop_matrix(t), routing.max_per_class)

    jobs = []
    for algorithm in exp.algorithms:
        for li, (rho, hold) in enumerate(levels):
            for seed in exp.seeds:
                cfg = replace(base, algorithm=algorithm, mean_holding_time=hold, seed=seed)
                jobs.append(((algorithm, li, seed), t, cfg, candidates))
    log.info("sweep %s: %d runs on %d worker(s)", name, len(jobs), exp.workers)
    if exp.workers > 1:
        with ProcessPoolExecutor(max_workers=exp.workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    by_key = {key: (r, err) for key, r, err in results}

    rows, failed = [], False
    for algorithm in exp.algorithms:
        for li, (rho, hold) in enumerate(levels):
            common = {
                "topology_name": name, "algorithm": algorithm, "traffic": base.traffic.name,
                "load_rho": rho, "mean_holding_time": hold,
            }
            done = []
            for seed in exp.seeds:
                r, err = by_key[(algorithm, li, seed)]
                if err:
                    failed = True
                    rows.append({**common, "row_type": "error", "seed": seed, "error": err})
                    continue
                done.append(r)
                rows.append({
                    **common, "row_type": "run", "seed": seed, "requests": r.requests,
                    "accepted": r.accepted, "rejected": r.rejected,
                    "flow_bp": r.flow_bp, "bw_bp": r.bw_bp,
                })
            if done:
                agg = mean_ci95([r.flow_bp for r in done])
                rows.append({
                    **common, "row_type": "aggregate",
                    "requests": sum(r.requests for r in done),
                    "accepted": sum(r.accepted for r in done),
                    "rejected": sum(r.rejected for r in done),
                    "flow_bp": agg.mean,
                    "bw_bp": mean_ci95([r.bw_bp for r in done]).mean,
                    "mean": agg.mean, "ci95_low": agg.ci95_low, "ci95_high": agg.ci95_high,
                    "n_seeds": agg.n,
                })
    _write_csv(rows, RUN_COLUMNS, exp.out)
    return EXIT_DOMAIN if failed else EXIT_OK


# --- argument parsing ------------------------------------------------------


def _add_routing_flags(p) -> None:
    g = p.add_argument_group("routing parameters")
    g.add_argument("--max-credits", dest="max_credits", type=float)
    g.add_argument("--phi", type=float)
    g.add_argument("--window", type=int, help="moving window length M for CBR and QBR")
    g.add_argument("--credit-rule", dest="credit_rule", choices=["scaled", "unit"])
    g.add_argument("--gamma-hat", dest="gamma_hat", type=int)
    g.add_argument("--psi", type=float)
    g.add_argument("--observation-period", dest="observation_period_cycles", type=int)
    g.add_argument("--max-per-class", dest="max_per_class", type=int)
    s = p.add_argument_group("traffic parameters")
    s.add_argument("--lambda", dest="lambda_per_source", type=float)
    s.add_argument("--bw-min", dest="bw_min", type=float)
    s.add_argument("--bw-max", dest="bw_max", type=float)
    s.add_argument("--capacity", dest="link_capacity", type=float)
    s.add_argument("--warmup", dest="warmup_requests", type=int)
    s.add_argument("--total", dest="total_requests", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcmnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structural metrics of topology files")
    p.add_argument("topology", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="generate a Waxman or Barabasi-Albert topology")
    p.add_argument("kind", choices=["waxman", "ba"])
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--links", type=int, help="exact link count (waxman)")
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--plane-size", type=float, default=1000.0)
    p.add_argument("--m", type=int, default=2, help="links per new node (ba)")
    p.add_argument("--m0", type=int, help="initial clique size (ba), default m+1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rewire", help="lower BCM by greedy link rewiring")
    p.add_argument("--topology", required=True)
    p.add_argument("--target-bcm", type=float, default=0.0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--candidate-budget", type=int, default=5000)
    p.add_argument("--allow-path-growth", action="store_true",
                   help="accept moves that lengthen the total hop distance")
    p.add_argument("--out")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("simulate", help="one simulation run")
    p.add_argument("--topology", required=True)
    p.add_argument("--algorithm", default="CBR", type=str.upper, choices=["CBR", "QBR", "PSR"])
    p.add_argument("--load", type=float)
    p.add_argument("--holding-time", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--traffic", choices=["uniform", "two_subnet"], default="uniform")
    p.add_argument("--subnet-labels", default="auto")
    p.add_argument("--intra-weight", type=float, default=3.0)
    p.add_argument("--out")
    _add_routing_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="load x algorithm x seed sweep to CSV")
    p.add_argument("--config")
    p.add_argument("--topology")
    p.add_argument("--name")
    p.add_argument("--algorithms", "--algorithm", dest="algorithms")
    p.add_argument("--loads", "--load", dest="loads")
    p.add_argument("--holding-times", dest="holding_times")
    p.add_argument("--seeds", "--seed", dest="seeds")
    p.add_argument("--traffic", choices=["uniform", "two_subnet"])
    p.add_argument("--subnet-labels")
    p.add_argument("--intra-weight", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    _add_routing_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
