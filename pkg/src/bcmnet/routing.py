"""Candidate paths and the localized routing schemes CBR, QBR and PSR.

Each scheme keeps per-path state at the source and picks one candidate path
per flow arrival, learning only from whether its own flows were admitted.
Path states are plain mutable objects; selection functions are pure.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidParams, InvalidPath, InvalidQuality, InvalidRequest, NoPath
from .topology import HopMatrix, Topology

ALGORITHMS = ("CBR", "QBR", "PSR")


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    @property
    def links(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (a, b) if a < b else (b, a) for a, b in zip(self.nodes, self.nodes[1:])
        )

    def __str__(self):
        return "-".join(map(str, self.nodes))


@dataclass(frozen=True)
class CandidatePathSet:
    src: int
    dst: int
    r_min: tuple[Path, ...]
    r_alt: tuple[Path, ...]

    @property
    def paths(self) -> tuple[Path, ...]:
        return self.r_min + self.r_alt

    def __len__(self):
        return len(self.r_min) + len(self.r_alt)

    def index(self, path: Path) -> int:
        try:
            return self.paths.index(path)
        except ValueError:
            raise InvalidPath(f"{path} is not a candidate for {self.src}->{self.dst}") from None


@dataclass(frozen=True)
class RoutingParams:
    max_credits: float = 5.0
    phi: float = 1.0
    window: int = 20
    credit_rule: str = "scaled"  # or "unit": plain +1 / -1
    gamma_hat: int = 5
    psi: float = 0.9
    observation_period_cycles: int = 5
    max_per_class: int = 8

    def __post_init__(self):
        if not 0 < self.phi <= 1:
            raise InvalidParams("phi must lie in (0, 1]")
        if self.max_credits <= 0:
            raise InvalidParams("max_credits must be positive")
        if self.window < 1:
            raise InvalidParams("window must be >= 1")
        if self.credit_rule not in ("scaled", "unit"):
            raise InvalidParams(f"unknown credit_rule {self.credit_rule!r}")
        if self.gamma_hat < 1:
            raise InvalidParams("gamma_hat must be >= 1")
        if not 0 < self.psi <= 1:
            raise InvalidParams("psi must lie in (0, 1]")
        if self.observation_period_cycles < 1:
            raise InvalidParams("observation_period_cycles must be >= 1")
        if self.max_per_class < 1:
            raise InvalidParams("max_per_class must be >= 1")


def enumerate_candidates(
    t: Topology, m: HopMatrix, src: int, dst: int, max_per_class: int = 8
) -> CandidatePathSet:
    """Simple paths of minimum length and of minimum length + 1.

    Depth-first search pruned with the hop matrix: a partial path ending at
    ``x`` after ``d`` hops is only extended if ``d + dist(x, dst)`` stays
    within the bound. Each class is sorted lexicographically and truncated.
    """
    if src == dst:
        raise NoPath("source and destination coincide")
    shortest = m.dist[src, dst]
    if not math.isfinite(shortest):
        raise NoPath(f"{dst} is unreachable from {src}")
    shortest = int(shortest)
    limit = shortest + 1
    to_dst = m.dist[:, dst]
    found: list[tuple[int, ...]] = []
    stack = [(src,)]
    while stack:
        prefix = stack.pop()
        tail = prefix[-1]
        if tail == dst:
            found.append(prefix)
            continue
        depth = len(prefix)  # hops after taking one more link
        for nxt in t.neighbors[tail]:
            if nxt not in prefix and depth + to_dst[nxt] <= limit:
                stack.append(prefix + (nxt,))
    found.sort()
    r_min = [Path(p) for p in found if len(p) - 1 == shortest][:max_per_class]
    r_alt = [Path(p) for p in found if len(p) - 1 == limit][:max_per_class]
    return CandidatePathSet(src, dst, tuple(r_min), tuple(r_alt))


# --- credit based routing -------------------------------------------------


class CbrState:
    """Credits and accept/reject window of one path."""

    def __init__(self, max_credits: float = 5.0, window: int = 20, credits: float | None = None):
        self.max_credits = max_credits
        self.credits = max_credits if credits is None else credits
        self.window: deque[int] = deque(maxlen=window)
        self._zeros = 0

    @property
    def blocking_prob(self) -> float:
        return self._zeros / len(self.window) if self.window else 0.0

    def push(self, accepted: bool) -> None:
        if len(self.window) == self.window.maxlen and self.window[0] == 0:
            self._zeros -= 1
        self.window.append(1 if accepted else 0)
        if not accepted:
            self._zeros += 1

    def update(self, accepted: bool, credit_rule: str = "scaled") -> CbrState:
        self.push(accepted)
        b = self.blocking_prob if credit_rule == "scaled" else 0.0
        if accepted:
            self.credits = min(self.credits + (1.0 - b), self.max_credits)
        else:
            self.credits = max(self.credits - (1.0 + b), 0.0)
        return self


def _best_by_credit(states: Sequence[CbrState], idxs) -> int | None:
    best = None
    for i in idxs:
        if best is None:
            best = i
            continue
        s, b = states[i], states[best]
        if s.credits > b.credits or (s.credits == b.credits and s.blocking_prob < b.blocking_prob):
            best = i
    return best


def cbr_choice(states: Sequence[CbrState], c: CandidatePathSet, phi: float) -> int:
    if not len(c):
        raise NoPath("empty candidate set")
    n_min = len(c.r_min)
    p_min = _best_by_credit(states, range(n_min))
    p_alt = _best_by_credit(states, range(n_min, len(c)))
    if p_alt is None:
        return p_min
    if p_min is None or states[p_min].credits < phi * states[p_alt].credits:
        return p_alt
    return p_min


def cbr_select(states: Sequence[CbrState], c: CandidatePathSet, phi: float) -> Path:
    """Best min-hop path unless the best alternative has more than 1/phi times its credits.

    ``states`` is aligned with ``c.paths``.
    """
    return c.paths[cbr_choice(states, c, phi)]


# --- quality based routing ------------------------------------------------


def qbr_quality(accepted: bool, residual_after: float, requested: float) -> float:
    """Map one admission outcome to a quality sample in [-1, 1].

    ``residual_after`` is the bottleneck residual after reserving (accepted) or
    the current bottleneck residual (rejected).
    """
    if requested <= 0:
        raise InvalidRequest("requested bandwidth must be positive")
    if accepted:
        if residual_after >= requested:
            return 1.0
        return max(residual_after, 0.0) / requested
    if residual_after >= requested:
        raise InvalidRequest("a rejected request must exceed the bottleneck residual")
    return -min(1.0, (requested - residual_after) / requested)


class QbrState:
    """Moving window of the most recent quality samples of one path."""

    def __init__(self, window: int = 20):
        self.quality_window: deque[float] = deque(maxlen=window)

    @property
    def average_quality(self) -> float:
        w = self.quality_window
        return math.fsum(w) / len(w) if w else 0.0

    def update(self, q: float) -> QbrState:
        if not -1.0 <= q <= 1.0:
            raise InvalidQuality(f"quality {q} outside [-1, 1]")
        self.quality_window.append(q)
        return self


def qbr_choice(states: Sequence[QbrState], c: CandidatePathSet) -> int:
    if not len(c):
        raise NoPath("empty candidate set")
    paths = c.paths
    best = 0
    best_q = states[0].average_quality
    for i in range(1, len(paths)):
        q = states[i].average_quality
        if q > best_q or (q == best_q and paths[i].hops < paths[best].hops):
            best, best_q = i, q
    return best


def qbr_select(states: Sequence[QbrState], c: CandidatePathSet) -> Path:
    """Path with the highest average quality; ties go to fewer hops, then list order."""
    return c.paths[qbr_choice(states, c)]


# --- proportional sticky routing ------------------------------------------


class PsrState:
    """Proportional sticky routing state for one source-destination pair."""

    def __init__(
        self,
        c: CandidatePathSet,
        gamma_hat: int = 5,
        psi: float = 0.9,
        observation_period_cycles: int = 5,
    ):
        if not len(c):
            raise NoPath("empty candidate set")
        self.candidates = c
        self.gamma_hat = gamma_hat
        self.psi = psi
        self.observation_period_cycles = observation_period_cycles
        n = len(c)
        self.n_min = len(c.r_min)
        self.alpha = [1.0 / n] * n
        self.gamma = [gamma_hat] * self.n_min + [1] * (n - self.n_min)
        self.blocked_this_cycle = [0] * n
        self.eligible = [True] * n
        self.observed_attempts = [0] * n
        self.observed_blocks = [0] * n
        self.cycles_completed = 0
        self.periods_completed = 0

    def reset_cycle(self) -> None:
        n = len(self.alpha)
        self.eligible = [True] * n
        self.blocked_this_cycle = [0] * n
        self.cycles_completed += 1
        if self.cycles_completed >= self.observation_period_cycles:
            self._end_period()

    def _end_period(self) -> None:
        attempts = self.observed_attempts
        blocks = self.observed_blocks
        total = sum(attempts)
        eps = 1.0 / (2 * total) if total else 1.0
        b = [blocks[i] / attempts[i] if attempts[i] else 0.0 for i in range(len(attempts))]

        mins = range(self.n_min)
        mass = sum(self.alpha[i] for i in mins)
        weights = [self.alpha[i] / max(b[i], eps) for i in mins]
        wsum = sum(weights)
        for i in mins:
            self.alpha[i] = mass * weights[i] / wsum

        tried = [b[i] for i in mins if attempts[i]]
        if tried:
            b_star = min(tried)
            for i in range(self.n_min, len(self.alpha)):
                if not attempts[i]:
                    continue
                if b[i] < self.psi * b_star:
                    self.gamma[i] = min(self.gamma[i] + 1, self.gamma_hat)
                elif b[i] > b_star:
                    self.gamma[i] = max(self.gamma[i] - 1, 1)

        s = sum(self.alpha)
        self.alpha = [a / s for a in self.alpha]
        self.observed_attempts = [0] * len(attempts)
        self.observed_blocks = [0] * len(attempts)
        self.cycles_completed = 0
        self.periods_completed += 1

    def choice(self, draw: float) -> int:
        if not any(self.eligible):
            self.reset_cycle()
        elig = [i for i, e in enumerate(self.eligible) if e]
        total = sum(self.alpha[i] for i in elig)
        target = draw * total
        acc = 0.0
        for i in elig:
            acc += self.alpha[i]
            if target < acc:
                return i
        return elig[-1]

    def select(self, draw: float) -> Path:
        """Sample an eligible path with probability proportional to its flow share."""
        return self.candidates.paths[self.choice(draw)]

    def record(self, idx: int, accepted: bool) -> None:
        self.observed_attempts[idx] += 1
        if not accepted:
            self.observed_blocks[idx] += 1
            self.blocked_this_cycle[idx] += 1
            if self.blocked_this_cycle[idx] >= self.gamma[idx]:
                self.eligible[idx] = False
                if not any(self.eligible):
                    self.reset_cycle()

    def update(self, path: Path, accepted: bool) -> PsrState:
        self.record(self.candidates.index(path), accepted)
        return self


# --- per-run routers used by the simulator --------------------------------


class Router:
    """Per-source state for every (src, dst) pair under one scheme."""

    name = ""
    uses_rng = False

    def __init__(self, candidates: dict, params: RoutingParams):
        self.candidates = candidates
        self.params = params

    def choose(self, key, draw: float) -> int:
        raise NotImplementedError

    def record(self, key, idx: int, accepted: bool, requested: float, bottleneck: float) -> None:
        raise NotImplementedError


class CbrRouter(Router):
    name = "CBR"

    def __init__(self, candidates, params):
        super().__init__(candidates, params)
        self.states = {
            k: [CbrState(params.max_credits, params.window) for _ in range(len(c))]
            for k, c in candidates.items()
        }

    def choose(self, key, draw):
        return cbr_choice(self.states[key], self.candidates[key], self.params.phi)

    def record(self, key, idx, accepted, requested, bottleneck):
        self.states[key][idx].update(accepted, self.params.credit_rule)


class QbrRouter(Router):
    name = "QBR"

    def __init__(self, candidates, params):
        super().__init__(candidates, params)
        self.states = {
            k: [QbrState(params.window) for _ in range(len(c))] for k, c in candidates.items()
        }

    def choose(self, key, draw):
        return qbr_choice(self.states[key], self.candidates[key])

    def record(self, key, idx, accepted, requested, bottleneck):
        residual = bottleneck - requested if accepted else bottleneck
        self.states[key][idx].update(qbr_quality(accepted, residual, requested))


class PsrRouter(Router):
    name = "PSR"
    uses_rng = True

    def __init__(self, candidates, params):
        super().__init__(candidates, params)
        self.states = {
            k: PsrState(c, params.gamma_hat, params.psi, params.observation_period_cycles)
            for k, c in candidates.items()
        }

    def choose(self, key, draw):
        return self.states[key].choice(draw)

    def record(self, key, idx, accepted, requested, bottleneck):
        self.states[key].record(idx, accepted)


ROUTERS = {"CBR": CbrRouter, "QBR": QbrRouter, "PSR": PsrRouter}


def make_router(algorithm: str, candidates: dict, params: RoutingParams) -> Router:
    try:
        cls = ROUTERS[algorithm.upper()]
    except KeyError:
        raise InvalidParams(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    return cls(candidates, params)
