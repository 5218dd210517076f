"""Acceptance criteria, one reported pass/fail line each.

Run ``pytest tests/test_acceptance.py -s`` (or the full suite) and read the
"acceptance criteria" section of the terminal summary.
"""
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import spearmanr

from bcmnet.generators import (
    BaParams,
    WaxmanParams,
    assign_subnetworks,
    generate_barabasi_albert,
    generate_waxman,
    split_in_two,
)
from bcmnet.rewire import RewireConfig, rewire_until
from bcmnet.routing import QbrState
from bcmnet.simulate import SimConfig, TwoSubnetTraffic, holding_time_for_load, offered_load, replicate
from bcmnet.topology import bcm, build_topology, hop_matrix, topology_stats

from conftest import FIG1_EDGES, PRISM_EDGES
from invariants import (
    check_candidates,
    check_conservation,
    check_credit_clamp,
    check_determinism,
    check_hop_matrix,
    check_permutation_invariance,
    check_psr_normalisation,
    check_quality_clamp,
    random_graph,
    random_psr_case,
    random_sim_case,
)
from oracles import erlang_b

SEEDS = [1, 2, 3, 4, 5]
WORKERS = 5


def report(lines, number, title, ok, detail):
    lines.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


def test_c1_worked_example(acceptance_report):
    start = time.perf_counter()
    t = build_topology(6, FIG1_EDGES)
    s = topology_stats(t)
    elapsed = time.perf_counter() - start
    ok = (
        abs(s.bcm - 1.2649) <= 0.0005
        and s.avg_path_length == 1.4
        and s.diameter == 2
        and (s.node_count, s.link_count) == (6, 9)
        and elapsed < 1.0
    )
    detail = (
        f"bcm={s.bcm:.6f} (1.2649 ± 0.0005), h={s.avg_path_length!r} (1.4 exact), "
        f"diameter={s.diameter}, N={s.node_count}, L={s.link_count}, {elapsed:.3f}s (< 1s)"
    )
    report(acceptance_report, 1, "worked example", ok, detail)


def test_c2_rewired_example(acceptance_report):
    m = hop_matrix(build_topology(6, PRISM_EDGES))
    s = topology_stats(build_topology(6, PRISM_EDGES))
    lam = m.row_sums.tolist()
    ok = bcm(m) == 0.0 and s.avg_path_length == 1.4 and lam == [7] * 6
    detail = f"bcm={bcm(m)!r} (0 exact), h={s.avg_path_length!r} (1.4 exact), row sums={lam}"
    report(acceptance_report, 2, "rewired example", ok, detail)


def test_c3_moving_average(acceptance_report):
    s = QbrState(5)
    for q in (0, 0.6, -1, -0.1, 1):
        s.update(q)
    first = s.average_quality
    s.update(1.0)
    second = s.average_quality
    ok = first == 0.1 and second == 0.3
    report(acceptance_report, 3, "QBR moving average", ok,
           f"{first!r} (0.1 exact), then {second!r} (0.3 exact)")


def test_c4_rewiring_reproduction(acceptance_report):
    start = time.perf_counter()
    fig1 = build_topology(6, FIG1_EDGES)
    t, trace = rewire_until(fig1, RewireConfig(max_steps=10, target_bcm=0))
    elapsed = time.perf_counter() - start
    values = [bcm(hop_matrix(fig1))] + [s.bcm_after for s in trace]
    final = bcm(hop_matrix(t))
    ok = (
        final == 0.0
        and (t.node_count, t.link_count) == (6, 9)
        and all(a > b for a, b in zip(values, values[1:]))
        and elapsed < 5.0
    )
    moves = ", ".join(f"{s.removed_edge}->{s.added_edge}" for s in trace)
    detail = (
        f"final bcm={final!r} after {len(trace)} steps [{moves}], "
        f"sequence {[round(v, 4) for v in values]}, N={t.node_count}, L={t.link_count}, "
        f"{elapsed:.2f}s (< 5s)"
    )
    report(acceptance_report, 4, "rewiring reproduction", ok, detail)


def test_c5_erlang_oracle(acceptance_report):
    start = time.perf_counter()
    link = build_topology(2, [(0, 1)])
    cfg = SimConfig(mean_holding_time=2.5, bw_min=15, bw_max=15, link_capacity=150,
                    warmup_requests=20_000, total_requests=220_000)
    rep = replicate(link, cfg, [1, 2, 3], workers=3)
    elapsed = time.perf_counter() - start
    target = erlang_b(10, 5.0)
    values = [r.flow_bp for r in rep.runs]
    ok = all(abs(v - target) <= 0.005 for v in values) and elapsed < 120
    detail = (
        f"flow_bp per seed {[round(v, 5) for v in values]} vs B(10, 5)={target:.6f} "
        f"(± 0.005), {elapsed:.1f}s (< 120s)"
    )
    report(acceptance_report, 5, "Erlang-B event-engine oracle", ok, detail)


@pytest.mark.slow
def test_c6_bcm_ordering(acceptance_report):
    start = time.perf_counter()
    pool = []
    for seed in range(40):
        t = generate_waxman(WaxmanParams(18, 58, seed=seed))
        pool.append((topology_stats(t), seed, t))
    pool.sort(key=lambda x: x[0].bcm)
    picked = [pool[i] for i in (0, 13, 26, 39)]
    bcms = [p[0].bcm for p in picked]
    h_mean = float(np.mean([p[0].avg_path_length for p in picked]))
    hold = 0.5 * 58 * 150 / (18 * h_mean * 1.05)
    results = {}
    for algo in ("CBR", "QBR"):
        cfg = SimConfig(algorithm=algo, mean_holding_time=hold, warmup_requests=20_000,
                        total_requests=120_000)
        results[algo] = [replicate(p[2], cfg, SEEDS, workers=WORKERS).flow_bp.mean for p in picked]
    rhos = [offered_load(hold, p[0], cfg) for p in picked]
    rho = {a: spearmanr(bcms, v).statistic for a, v in results.items()}
    elapsed = time.perf_counter() - start
    ok = len(set(bcms)) == 4 and all(r >= 0.5 for r in rho.values()) and elapsed < 900
    detail = (
        f"Waxman seeds {[p[1] for p in picked]} with BCM {[round(b, 3) for b in bcms]}, "
        f"rho {[round(r, 3) for r in rhos]}; "
        + "; ".join(
            f"{a} flow_bp {[round(v, 4) for v in results[a]]} spearman={rho[a]:.2f} (>= 0.5)"
            for a in results
        )
        + f"; {elapsed:.0f}s (< 900s)"
    )
    report(acceptance_report, 6, "BCM ordering predicts blocking", ok, detail)


@pytest.fixture(scope="module")
def ba_experiment():
    ba = generate_barabasi_albert(BaParams(32, m=2, seed=3))
    rewired, trace = rewire_until(ba, RewireConfig())
    stats = topology_stats(ba)
    out = {"ba": ba, "rewired": rewired, "steps": len(trace), "stats": stats,
           "rewired_stats": topology_stats(rewired), "uniform": {}, "rewired_bp": {},
           "two_subnet": {}}
    base = SimConfig(algorithm="QBR", mean_holding_time=1.0)
    labels = split_in_two(ba)
    out["subnets"] = assign_subnetworks(ba, labels)
    for rho in (0.4, 0.6):
        cfg = replace(base, mean_holding_time=holding_time_for_load(rho, stats, base))
        out["uniform"][rho] = replicate(ba, cfg, SEEDS, workers=WORKERS).flow_bp.mean
        out["rewired_bp"][rho] = replicate(rewired, cfg, SEEDS, workers=WORKERS).flow_bp.mean
        local = replace(cfg, traffic=TwoSubnetTraffic(labels, 3.0))
        out["two_subnet"][rho] = replicate(ba, local, SEEDS, workers=WORKERS).flow_bp.mean
    return out


@pytest.mark.slow
def test_c7_rewiring_improves(acceptance_report, ba_experiment):
    e = ba_experiment
    s0, s1 = e["stats"], e["rewired_stats"]
    same_size = (s0.node_count, s0.link_count) == (s1.node_count, s1.link_count)
    better = all(e["rewired_bp"][r] <= e["uniform"][r] for r in (0.4, 0.6))
    shorter = s1.avg_path_length <= s0.avg_path_length
    ok = same_size and better and shorter
    detail = (
        f"BA(32, m=2, seed 3) N={s0.node_count} L={s0.link_count}, {e['steps']} rewiring steps, "
        f"BCM {s0.bcm:.3f} -> {s1.bcm:.3f}, h {s0.avg_path_length:.4f} -> {s1.avg_path_length:.4f}; "
        + ", ".join(
            f"rho {r}: QBR flow_bp {e['uniform'][r]:.4f} -> {e['rewired_bp'][r]:.4f}"
            for r in (0.4, 0.6)
        )
    )
    report(acceptance_report, 7, "rewiring improves performance", ok, detail)


@pytest.mark.slow
def test_c8_two_subnet_traffic(acceptance_report, ba_experiment):
    e = ba_experiment
    sub = e["subnets"]
    sizes = [len(sub.members(0)), len(sub.members(1))]
    ok = all(e["two_subnet"][r] <= e["uniform"][r] for r in (0.4, 0.6))
    detail = (
        f"partition sizes {sizes}, sub-network BCM {[round(b, 3) for b in sub.per_subnet_bcm]}, "
        f"whole {sub.whole_bcm:.3f}; "
        + ", ".join(
            f"rho {r}: QBR flow_bp uniform {e['uniform'][r]:.4f} vs two-subnet {e['two_subnet'][r]:.4f}"
            for r in (0.4, 0.6)
        )
    )
    report(acceptance_report, 8, "non-uniform traffic", ok, detail)


CASES = 1000


def _run_cases(name, check):
    rng = np.random.default_rng(sum(map(ord, name)))
    for _ in range(CASES):
        check(rng)


INVARIANTS = {
    "BCM permutation invariance": lambda rng: (
        lambda t: check_permutation_invariance(t, rng.permutation(t.node_count))
    )(random_graph(rng)),
    "hop matrix triangle inequality / Floyd-Warshall": lambda rng: check_hop_matrix(random_graph(rng)),
    "candidate paths vs brute force (N <= 7)": lambda rng: check_candidates(random_graph(rng, 7)),
    "CBR credit clamp": lambda rng: check_credit_clamp(
        float(rng.uniform(0.5, 10)), int(rng.integers(1, 30)), str(rng.choice(["scaled", "unit"])),
        list(rng.random(int(rng.integers(0, 100))) < 0.5),
    ),
    "QBR quality clamp": lambda rng: check_quality_clamp(
        int(rng.integers(1, 30)),
        [
            (bool(a), float(r), float(q))
            for a, r, q in zip(
                rng.random(60) < 0.5, rng.uniform(0, 200, 60), rng.uniform(0.01, 10, 60)
            )
        ],
    ),
    "PSR alpha normalisation": lambda rng: check_psr_normalisation(*random_psr_case(rng)),
    "link reservation conservation": lambda rng: check_conservation(*random_sim_case(rng)),
    "determinism": lambda rng: check_determinism(*random_sim_case(rng, max_nodes=6)),
}


@pytest.mark.slow
def test_c9_property_suites(acceptance_report):
    start = time.perf_counter()
    failures = []
    timings = []
    for name, check in INVARIANTS.items():
        t0 = time.perf_counter()
        try:
            _run_cases(name, check)
        except AssertionError as exc:
            failures.append(f"{name}: {exc!r}")
        timings.append(f"{name} {time.perf_counter() - t0:.1f}s")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    detail = (
        f"{len(INVARIANTS)} invariants x {CASES} random cases (N <= 12) "
        f"[{'; '.join(timings)}], {elapsed:.0f}s (< 300s)"
        + (f"; failures: {failures}" if failures else "")
    )
    report(acceptance_report, 9, "property suites", ok, detail)
