"""Flow-level discrete-event simulation of localized QoS routing.

Flows arrive at every node as independent Poisson streams, pick a destination,
request a bandwidth and hold it for an exponential time. The routing scheme
picks one candidate path; the flow is admitted only if every link on it has
enough residual capacity, otherwise it is lost (no retry on another path).
"""
from __future__ import annotations

import bisect
import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DisconnectedTopology, InvalidConfig, InvalidTopology, UsageError
from .routing import ALGORITHMS, CandidatePathSet, RoutingParams, enumerate_candidates, make_router
from .topology import HopMatrix, Topology, TopologyStats, hop_matrix, topology_stats


# --- traffic models -------------------------------------------------------


@dataclass(frozen=True)
class UniformTraffic:
    name = "uniform"

    def weights(self, src: int, n: int) -> list[float]:
        return [0.0 if d == src else 1.0 for d in range(n)]


@dataclass(frozen=True)
class TwoSubnetTraffic:
    """Destinations inside the source's sub-network get ``intra_weight`` times the weight."""

    labels: tuple[int, ...]
    intra_weight: float = 3.0
    name = "two_subnet"

    def weights(self, src: int, n: int) -> list[float]:
        if len(self.labels) != n:
            raise InvalidConfig(f"{len(self.labels)} subnet labels for {n} nodes")
        own = self.labels[src]
        return [
            0.0 if d == src else (self.intra_weight if self.labels[d] == own else 1.0)
            for d in range(n)
        ]


class DestinationSampler:
    """Inverse-CDF destination draws with per-source cumulative tables."""

    def __init__(self, traffic, n: int):
        if n < 2:
            raise InvalidTopology("traffic needs at least two nodes")
        self.n = n
        self.uniform = isinstance(traffic, UniformTraffic)
        self.tables = []
        for src in range(n):
            w = traffic.weights(src, n)
            total = math.fsum(w)
            self.tables.append(np.cumsum(w) / total)

    def __call__(self, src: int, u: float) -> int:
        if self.uniform:
            d = int(u * (self.n - 1))
            return d + 1 if d >= src else d
        table = self.tables[src]
        d = bisect.bisect_right(table, u)
        # guard against a cumulative total that rounds to just below 1
        while d >= self.n or table[d] == (table[d - 1] if d else 0.0):
            d -= 1
        return d


def sample_destination(src: int, n: int, traffic, u: float) -> int:
    return DestinationSampler(traffic, n)(src, u)


# --- configuration and results --------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    algorithm: str = "CBR"
    routing: RoutingParams = field(default_factory=RoutingParams)
    lambda_per_source: float = 1.0
    mean_holding_time: float | None = None
    target_load: float | None = None
    bw_min: float = 0.1
    bw_max: float = 2.0
    link_capacity: float = 150.0
    warmup_requests: int = 20_000
    total_requests: int = 220_000
    seed: int = 0
    traffic: UniformTraffic | TwoSubnetTraffic = field(default_factory=UniformTraffic)

    def validate(self) -> None:
        if self.algorithm.upper() not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm {self.algorithm!r}")
        if (self.mean_holding_time is None) == (self.target_load is None):
            raise InvalidConfig("give exactly one of mean_holding_time and target_load")
        if self.mean_holding_time is not None and self.mean_holding_time <= 0:
            raise InvalidConfig("mean_holding_time must be positive")
        if self.target_load is not None and self.target_load <= 0:
            raise InvalidConfig("target_load must be positive")
        if not 0 < self.bw_min <= self.bw_max:
            raise InvalidConfig("need 0 < bw_min <= bw_max")
        if self.lambda_per_source <= 0 or self.link_capacity <= 0:
            raise InvalidConfig("lambda_per_source and link_capacity must be positive")
        if not 0 <= self.warmup_requests < self.total_requests:
            raise InvalidConfig("need 0 <= warmup_requests < total_requests")

    @property
    def mean_bandwidth(self) -> float:
        return (self.bw_min + self.bw_max) / 2


@dataclass(frozen=True)
class RunMetrics:
    requests: int
    accepted: int
    rejected: int
    bw_requested_total: float
    bw_blocked_total: float

    @property
    def flow_bp(self) -> float:
        return self.rejected / self.requests if self.requests else 0.0

    @property
    def bw_bp(self) -> float:
        return self.bw_blocked_total / self.bw_requested_total if self.bw_requested_total else 0.0


@dataclass(frozen=True)
class Aggregate:
    mean: float
    ci95_low: float
    ci95_high: float
    n: int


def mean_ci95(values: Sequence[float]) -> Aggregate:
    """Mean with a Student-t 95% interval; a single value gives a zero-width interval."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise UsageError("no values to aggregate")
    mean = float(x.mean())
    if n == 1:
        return Aggregate(mean, mean, mean, 1)
    half = float(stats.t.ppf(0.975, n - 1) * x.std(ddof=1) / math.sqrt(n))
    return Aggregate(mean, mean - half, mean + half, n)


@dataclass(frozen=True)
class SweepResult:
    seeds: tuple[int, ...]
    runs: tuple[RunMetrics, ...]
    flow_bp: Aggregate
    bw_bp: Aggregate


def holding_time_for_load(target_rho: float, ts: TopologyStats, cfg: SimConfig) -> float:
    """Mean holding time that makes the offered load equal ``target_rho``.

    Offered load is lambda * N * h * b / (mu * L * C) with h the mean hop count
    and b the mean requested bandwidth.
    """
    if ts.avg_path_length <= 0 or ts.link_count <= 0:
        raise InvalidTopology("offered load needs a positive link count and path length")
    if target_rho <= 0:
        raise InvalidConfig("target load must be positive")
    return (
        target_rho
        * ts.link_count
        * cfg.link_capacity
        / (cfg.lambda_per_source * ts.node_count * ts.avg_path_length * cfg.mean_bandwidth)
    )


def offered_load(mean_holding_time: float, ts: TopologyStats, cfg: SimConfig) -> float:
    return (
        cfg.lambda_per_source * ts.node_count * ts.avg_path_length * cfg.mean_bandwidth
        * mean_holding_time / (ts.link_count * cfg.link_capacity)
    )


def all_candidates(t: Topology, m: HopMatrix, max_per_class: int = 8) -> dict:
    """Candidate sets for every ordered (src, dst) pair."""
    if not m.reachable:
        raise DisconnectedTopology("topology is disconnected")
    n = t.node_count
    return {
        (s, d): enumerate_candidates(t, m, s, d, max_per_class)
        for s in range(n)
        for d in range(n)
        if s != d
    }


# --- the event engine -----------------------------------------------------

STREAMS = ("arrivals", "destinations", "bandwidths", "durations", "algorithm")


def substreams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators per purpose so one stream never perturbs another."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


class Simulator:
    """One simulation run over a fixed topology.

    ``observer``, if given, is called as ``observer(sim, event)`` after every
    arrival and departure; it is meant for invariant checks in tests.
    """

    def __init__(
        self,
        t: Topology,
        cfg: SimConfig,
        candidates: dict | None = None,
        observer: Callable | None = None,
    ):
        cfg.validate()
        self.topology = t
        self.cfg = cfg
        m = hop_matrix(t)
        if not m.reachable:
            raise DisconnectedTopology("topology is disconnected")
        if cfg.mean_holding_time is not None:
            self.mean_holding_time = cfg.mean_holding_time
        else:
            self.mean_holding_time = holding_time_for_load(cfg.target_load, topology_stats(t, m), cfg)
        if candidates is None:
            candidates = all_candidates(t, m, cfg.routing.max_per_class)
        self.candidates: dict[tuple[int, int], CandidatePathSet] = candidates
        self.link_index = {e: i for i, e in enumerate(t.edges)}
        self.path_links = {
            key: [tuple(self.link_index[e] for e in p.links) for p in c.paths]
            for key, c in candidates.items()
        }
        self.router = make_router(cfg.algorithm, candidates, cfg.routing)
        self.reserved = [0.0] * t.link_count
        self.active_on_link = [0] * t.link_count
        self.active: dict[int, tuple[tuple[int, ...], float]] = {}
        self.observer = observer
        self.now = 0.0

    def _release(self, flow_id: int) -> None:
        links, bw = self.active.pop(flow_id)
        reserved = self.reserved
        for li in links:
            self.active_on_link[li] -= 1
            # an idle link is exactly empty; avoids residue from float subtraction
            reserved[li] = reserved[li] - bw if self.active_on_link[li] else 0.0

    def run(self) -> RunMetrics:
        cfg = self.cfg
        n = self.topology.node_count
        total = cfg.total_requests
        rng = substreams(cfg.seed)
        arrivals = np.cumsum(rng["arrivals"].exponential(1.0 / (n * cfg.lambda_per_source), total))
        sources = rng["arrivals"].integers(0, n, total)
        dest_u = rng["destinations"].random(total)
        bandwidths = cfg.bw_min + (cfg.bw_max - cfg.bw_min) * rng["bandwidths"].random(total)
        durations = self.mean_holding_time * rng["durations"].standard_exponential(total)
        algo_u = rng["algorithm"].random(total) if self.router.uses_rng else np.zeros(total)
        dest_of = DestinationSampler(cfg.traffic, n)

        capacity = cfg.link_capacity
        reserved = self.reserved
        active_on_link = self.active_on_link
        router = self.router
        path_links = self.path_links
        observer = self.observer
        departures: list[tuple[float, int]] = []
        accepted = rejected = 0
        bw_req = bw_blk = 0.0

        for k in range(total):
            now = float(arrivals[k])
            while departures and departures[0][0] <= now:
                when, fid = heapq.heappop(departures)
                self.now = when
                self._release(fid)
                if observer:
                    observer(self, "departure")
            self.now = now
            src = int(sources[k])
            key = (src, dest_of(src, float(dest_u[k])))
            bw = float(bandwidths[k])
            idx = router.choose(key, float(algo_u[k]))
            links = path_links[key][idx]
            bottleneck = min(capacity - reserved[li] for li in links)
            ok = bottleneck >= bw
            if ok:
                for li in links:
                    reserved[li] += bw
                    active_on_link[li] += 1
                self.active[k] = (links, bw)
                heapq.heappush(departures, (now + float(durations[k]), k))
            router.record(key, idx, ok, bw, bottleneck)
            if k >= cfg.warmup_requests:
                bw_req += bw
                if ok:
                    accepted += 1
                else:
                    rejected += 1
                    bw_blk += bw
            if observer:
                observer(self, "arrival")

        while departures:
            when, fid = heapq.heappop(departures)
            self.now = when
            self._release(fid)
            if observer:
                observer(self, "departure")

        return RunMetrics(
            requests=total - cfg.warmup_requests,
            accepted=accepted,
            rejected=rejected,
            bw_requested_total=bw_req,
            bw_blocked_total=bw_blk,
        )


def run_simulation(t: Topology, cfg: SimConfig, candidates: dict | None = None) -> RunMetrics:
    return Simulator(t, cfg, candidates).run()


def _run_seed(args):
    t, cfg, candidates = args
    return run_simulation(t, cfg, candidates)


def replicate(t: Topology, cfg: SimConfig, seeds: Sequence[int], workers: int = 1) -> SweepResult:
    """Independent runs per seed, aggregated with Student-t 95% intervals."""
    seeds = tuple(seeds)
    if not seeds:
        raise InvalidConfig("need at least one seed")
    cfg.validate()
    m = hop_matrix(t)
    if not m.reachable:
        raise DisconnectedTopology("topology is disconnected")
    candidates = all_candidates(t, m, cfg.routing.max_per_class)
    jobs = [(t, replace(cfg, seed=s), candidates) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = tuple(pool.map(_run_seed, jobs))
    else:
        runs = tuple(map(_run_seed, jobs))
    return SweepResult(
        seeds=seeds,
        runs=runs,
        flow_bp=mean_ci95([r.flow_bp for r in runs]),
        bw_bp=mean_ci95([r.bw_bp for r in runs]),
    )
