"""Dynamic-traffic simulation of a network in operation.

One *run* generates a Gabriel graph, offers Poisson traffic for a number of
days, routes every arrival with one router, allocates a slot with one policy
and records per-day metrics.  A *population* is a set of runs that differ only
in their seeds; :func:`aggregate` reduces it to sample means.

Time is measured in days throughout.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .baselines import edge_disjoint_paths, route_over_candidates, yen_ksp
from .policies import get_policy
from .routing import Demand, RouteResult, SearchCounters, search
from .topology import Multigraph, gabriel_generate

log = logging.getLogger(__name__)

ROUTERS = ("proposed", "edksp", "yenksp")
POLICY_NAMES = ("fittest", "first")
FULL_GRID_LAMBDAS = (
    10, 12.5, 15, 17.5, 20, 25, 30, 35, 40, 45, 50, 55, 60, 70, 80, 90,
    100, 150, 200, 300, 400, 500, 600, 700, 800, 900, 1000,
)  # fmt: skip


class ConservationError(AssertionError):
    pass


class RouteError(AssertionError):
    """A router returned a path that loops, ends elsewhere or breaks the length limit."""


@dataclass(frozen=True)
class TrafficConfig:
    lam: float = 35.0  # arrivals per day
    holding_days: float = 10.0  # mean holding time
    mean_slices: float = 10.0
    days: int = 100

    def __post_init__(self) -> None:
        for name in ("lam", "holding_days", "mean_slices", "days"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class NetworkConfig:
    nodes: int = 100
    width: float = 1000.0
    height: float = 1000.0
    slices: int = 400
    limit_km: float = 2000.0
    k: int = 10
    limit_baselines: bool = True

    def generate(self, seed) -> Multigraph:
        return gabriel_generate(self.nodes, self.width, self.height, self.slices, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# routers


class Router:
    name = "?"
    cap: float | None = None  # length limit enforced on returned paths

    def route(self, d: Demand) -> tuple[Optional[RouteResult], SearchCounters]:
        raise NotImplementedError


class ProposedRouter(Router):
    name = "proposed"

    def __init__(self, g: Multigraph, m: float):
        self.g, self.m = g, m
        self.cap = m

    def route(self, d):
        counters = SearchCounters()
        return search(self.g, d, self.m, counters=counters), counters


class CandidateRouter(Router):
    """Two-stage router over a cached, spectrum-independent candidate list.

    The cache stores the generator's operation counts with each list so that
    repeated (s, t) pairs report the same effort as a fresh computation.
    """

    def __init__(self, g: Multigraph, kind: str, m: float, k: int = 10, limit: bool = True, cache: dict | None = None):
        if kind not in ("edksp", "yenksp"):
            raise ValueError(f"unknown candidate generator {kind!r}")
        self.g, self.kind, self.m, self.k = g, kind, m, k
        self.limit = limit
        self.cap = m if limit else None
        self.name = kind
        self.cache = {} if cache is None else cache

    def candidates(self, s: int, t: int):
        key = (s, t)
        hit = self.cache.get(key)
        if hit is None:
            ops = SearchCounters()
            if self.kind == "yenksp":
                paths = yen_ksp(self.g, s, t, self.k, counters=ops)
            else:
                paths = edge_disjoint_paths(self.g, s, t, counters=ops)
            hit = self.cache[key] = (paths, ops)
        return hit

    def route(self, d):
        paths, ops = self.candidates(d.source, d.target)
        counters = SearchCounters(queue_pops=ops.queue_pops, relaxations=ops.relaxations)
        res = route_over_candidates(self.g, paths, d, self.m if self.limit else None, counters=counters)
        return res, counters


def make_router(name: str, g: Multigraph, net: NetworkConfig, cache: dict | None = None) -> Router:
    if name == "proposed":
        return ProposedRouter(g, net.limit_km)
    if name in ("edksp", "yenksp"):
        return CandidateRouter(g, name, net.limit_km, net.k, net.limit_baselines, cache)
    raise ValueError(f"unknown router {name!r}; choose from {ROUTERS}")


# ---------------------------------------------------------------------------
# traffic


@dataclass(frozen=True)
class Arrivals:
    time: np.ndarray
    source: np.ndarray
    target: np.ndarray
    slices: np.ndarray
    holding: np.ndarray

    def __len__(self) -> int:
        return len(self.time)


def draw_arrivals(cfg: TrafficConfig, node_count: int, rng: np.random.Generator) -> Arrivals:
    """All arrivals of one run, drawn up front so routing cannot perturb the stream."""
    chunk = max(16, int(cfg.lam * cfg.days * 1.2) + 16)
    times = np.cumsum(rng.exponential(1.0 / cfg.lam, size=chunk))
    while times[-1] < cfg.days:
        more = times[-1] + np.cumsum(rng.exponential(1.0 / cfg.lam, size=chunk))
        times = np.concatenate([times, more])
    times = times[times < cfg.days]
    count = len(times)
    source = rng.integers(0, node_count, size=count)
    target = rng.integers(0, node_count - 1, size=count)
    target = target + (target >= source)
    slices = rng.poisson(cfg.mean_slices, size=count)
    zero = slices == 0
    while zero.any():
        slices[zero] = rng.poisson(cfg.mean_slices, size=int(zero.sum()))
        zero = slices == 0
    holding = rng.exponential(cfg.holding_days, size=count)
    return Arrivals(times, source, target, slices, holding)


# ---------------------------------------------------------------------------
# metrics


@dataclass
class DailyMetrics:
    utilization: float
    p_establish: float  # nan on days without arrivals
    active_connections: int
    capacity_served: int
    mean_connection_length: float  # nan on days without established connections
    mean_connection_slices: float
    mean_edge_fragments: float
    mean_search_time: float  # nan unless timing is on
    mean_search_ops: float
    mean_relaxations: float
    attempted: int = 0
    established: int = 0


METRICS = (
    "utilization",
    "p_establish",
    "active_connections",
    "capacity_served",
    "mean_connection_length",
    "mean_connection_slices",
    "mean_edge_fragments",
    "mean_search_time",
    "mean_search_ops",
    "mean_relaxations",
)


def _nanmean(values: Sequence[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan


@dataclass
class RunResults:
    router: str
    policy: str
    lam: float
    graph_seed: int
    traffic_seed: int
    days: list[DailyMetrics]
    summary: dict[str, float] = field(default_factory=dict)
    attempted: int = 0
    established: int = 0

    @classmethod
    def build(cls, days: list[DailyMetrics], pooled_p: bool = False, **meta) -> "RunResults":
        res = cls(days=days, **meta)
        res.attempted = sum(d.attempted for d in days)
        res.established = sum(d.established for d in days)
        res.summary = {name: _nanmean([float(getattr(d, name)) for d in days]) for name in METRICS}
        if pooled_p:
            res.summary["p_establish"] = res.established / res.attempted if res.attempted else math.nan
        return res


@dataclass
class _DayAccumulator:
    attempted: int = 0
    established: int = 0
    length: float = 0.0
    slices: int = 0
    searches: int = 0
    seconds: float = 0.0
    ops: int = 0
    relaxations: int = 0


@dataclass
class _Connection:
    path: tuple[int, ...]
    links: list[int]
    slot_mask: int
    slices: int


# ---------------------------------------------------------------------------
# single run


def _check_route(g: Multigraph, d: Demand, res: RouteResult, m: float | None) -> None:
    nodes = g.path_nodes(res.path)
    if not nodes or nodes[0] != d.source or nodes[-1] != d.target:
        raise RouteError(f"path {res.path} does not join {d.source} to {d.target}")
    if len(set(nodes)) != len(nodes):
        raise RouteError(f"path {res.path} revisits a node")
    if m is not None and res.cost > m:
        raise RouteError(f"path cost {res.cost} exceeds limit {m}")


def run(
    graph_seed: int,
    traffic_seed: int,
    router: str = "proposed",
    policy: str = "fittest",
    cfg: TrafficConfig = TrafficConfig(),
    m: float | None = None,
    *,
    net: NetworkConfig = NetworkConfig(),
    graph: Multigraph | None = None,
    candidate_cache: dict | None = None,
    timing: bool = False,
    debug: bool = False,
    pooled_p: bool = False,
    on_event: Callable[[Multigraph, int], None] | None = None,
) -> RunResults:
    """Simulate ``cfg.days`` days of one network under dynamic traffic.

    ``graph`` overrides generation from ``graph_seed`` (its spectrum is reset).
    ``debug`` checks slice conservation after every event.  ``on_event`` is
    called as ``on_event(graph, used_slices)`` after every event.
    """
    if m is not None:
        net = NetworkConfig(**{**asdict(net), "limit_km": m})
    g = net.generate(graph_seed) if graph is None else graph
    g.reset_spectrum()
    rtr = make_router(router, g, net, candidate_cache)
    alloc = get_policy(policy)
    arrivals = draw_arrivals(cfg, g.node_count, np.random.default_rng(traffic_seed))

    total = g.omega * len(g.links)
    used = 0
    active: dict[int, _Connection] = {}
    capacity = 0
    teardowns: list[tuple[float, int]] = []
    avail = g.avail

    def check() -> None:
        if debug and used + g.free_slices() != total:
            raise ConservationError(f"used {used} + free {g.free_slices()} != {total}")
        if on_event is not None:
            on_event(g, used)

    def release_until(limit: float) -> None:
        nonlocal used, capacity
        while teardowns and teardowns[0][0] <= limit:
            _, cid = heapq.heappop(teardowns)
            conn = active.pop(cid)
            for lid in conn.links:
                if avail[lid] & conn.slot_mask:
                    raise ConservationError(f"releasing free slices on link {lid}")
                avail[lid] |= conn.slot_mask
            used -= conn.slices * len(conn.links)
            capacity -= conn.slices
            check()

    days: list[DailyMetrics] = []
    i = 0
    count = len(arrivals)
    times, src, dst = arrivals.time, arrivals.source, arrivals.target
    nsl, hold = arrivals.slices, arrivals.holding
    for day in range(cfg.days):
        acc = _DayAccumulator()
        end = day + 1.0
        while i < count and times[i] < end:
            now = float(times[i])
            release_until(now)
            d = Demand(int(src[i]), int(dst[i]), int(nsl[i]))
            acc.attempted += 1
            t0 = time.perf_counter() if timing else 0.0
            res, ops = rtr.route(d)
            if timing:
                acc.seconds += time.perf_counter() - t0
            acc.searches += 1
            acc.ops += ops.queue_pops + ops.relaxations
            acc.relaxations += ops.relaxations
            if res is not None:
                _check_route(g, d, res, rtr.cap)
                slot = alloc(res.sigma, d.n)
                links = g.path_links(res.path)
                mask = slot.mask
                for lid in links:
                    if avail[lid] & mask != mask:
                        raise ConservationError(f"slot {tuple(slot)} not free on link {lid}")
                    avail[lid] &= ~mask
                used += d.n * len(links)
                capacity += d.n
                active[i] = _Connection(res.path, links, mask, d.n)
                heapq.heappush(teardowns, (now + float(hold[i]), i))
                acc.established += 1
                acc.length += res.cost
                acc.slices += d.n
            check()
            i += 1
        release_until(end)
        nan = math.nan
        days.append(
            DailyMetrics(
                utilization=used / total if total else 0.0,
                p_establish=acc.established / acc.attempted if acc.attempted else nan,
                active_connections=len(active),
                capacity_served=capacity,
                mean_connection_length=acc.length / acc.established if acc.established else nan,
                mean_connection_slices=acc.slices / acc.established if acc.established else nan,
                mean_edge_fragments=g.mean_fragments(),
                mean_search_time=acc.seconds / acc.searches if timing and acc.searches else nan,
                mean_search_ops=acc.ops / acc.searches if acc.searches else nan,
                mean_relaxations=acc.relaxations / acc.searches if acc.searches else nan,
                attempted=acc.attempted,
                established=acc.established,
            )
        )
    return RunResults.build(
        days,
        pooled_p=pooled_p,
        router=router,
        policy=policy,
        lam=cfg.lam,
        graph_seed=graph_seed,
        traffic_seed=traffic_seed,
    )


# ---------------------------------------------------------------------------
# populations


class ReliabilityError(RuntimeError):
    pass


@dataclass
class PopulationResults:
    router: str
    policy: str
    lam: float
    samples: int
    mean: dict[str, float]
    se: dict[str, float]
    rse: dict[str, float]
    min_search_time: float

    def reliability(self, metric: str = "p_establish", warn: float = 0.01, fail: float = 0.05) -> float:
        """Relative standard error of ``metric``; logs above ``warn``, raises above ``fail``."""
        rse = self.rse[metric]
        if rse > fail:
            raise ReliabilityError(f"{self.router}/{self.policy}/lambda={self.lam}: RSE({metric}) = {rse:.3%}")
        if rse > warn:
            log.warning("%s/%s/lambda=%s: RSE(%s) = %.3f%% above %.1f%%", self.router, self.policy, self.lam, metric, 100 * rse, 100 * warn)
        return rse


def aggregate(samples: Sequence[RunResults]) -> PopulationResults:
    """Sample means per metric; the search time is the minimum over samples."""
    if not samples:
        raise ValueError("need at least one sample")
    first = samples[0]
    mean, se, rse = {}, {}, {}
    for name in METRICS:
        vals = [r.summary[name] for r in samples if not math.isnan(r.summary[name])]
        if not vals:
            mean[name] = se[name] = rse[name] = math.nan
            continue
        mu = math.fsum(vals) / len(vals)
        if len(vals) > 1:
            var = math.fsum((v - mu) ** 2 for v in vals) / (len(vals) - 1)
            err = math.sqrt(var / len(vals))
        else:
            err = math.nan
        mean[name], se[name] = mu, err
        rse[name] = 0.0 if err == 0 else (err / abs(mu) if mu else math.nan)
    times = [r.summary["mean_search_time"] for r in samples if not math.isnan(r.summary["mean_search_time"])]
    return PopulationResults(
        router=first.router,
        policy=first.policy,
        lam=first.lam,
        samples=len(samples),
        mean=mean,
        se=se,
        rse=rse,
        min_search_time=min(times) if times else math.nan,
    )


# ---------------------------------------------------------------------------
# campaigns


class CampaignError(RuntimeError):
    pass


@dataclass(frozen=True)
class CampaignSpec:
    routers: tuple[str, ...] = ROUTERS
    policies: tuple[str, ...] = POLICY_NAMES
    lambdas: tuple[float, ...] = FULL_GRID_LAMBDAS
    samples: int = 50
    seed: int = 1
    net: NetworkConfig = NetworkConfig()
    holding_days: float = 10.0
    mean_slices: float = 10.0
    days: int = 100
    timing: bool = False
    pooled_p: bool = False

    def __post_init__(self) -> None:
        for r in self.routers:
            if r not in ROUTERS:
                raise ValueError(f"unknown router {r!r}")
        for p in self.policies:
            get_policy(p)
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.lambdas:
            raise ValueError("empty lambda list")

    def populations(self) -> list[tuple[str, str, float]]:
        return [(r, p, float(lam)) for r in self.routers for p in self.policies for lam in self.lambdas]

    def traffic(self, lam: float) -> TrafficConfig:
        return TrafficConfig(lam=lam, holding_days=self.holding_days, mean_slices=self.mean_slices, days=self.days)

    def graph_seed(self, sample: int) -> int:
        return _derive_seed(self.seed, 1, sample)

    def traffic_seed(self, sample: int, lam: float) -> int:
        # shared by all routers and policies at the same (sample, lambda)
        return _derive_seed(self.seed, 2, sample, round(lam * 1000))


def _derive_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1, np.uint64)[0])


# per-process reuse of the last graph and its candidate caches
_WORKER_STATE: dict = {}


def _graph_for(net: NetworkConfig, seed: int) -> tuple[Multigraph, dict]:
    key = (net.nodes, net.width, net.height, net.slices, seed)
    if _WORKER_STATE.get("key") != key:
        _WORKER_STATE.clear()
        _WORKER_STATE["key"] = key
        _WORKER_STATE["graph"] = net.generate(seed)
        _WORKER_STATE["caches"] = {}
    return _WORKER_STATE["graph"], _WORKER_STATE["caches"]


def run_task(spec: CampaignSpec, router: str, policy: str, lam: float, sample: int) -> RunResults:
    gs, ts = spec.graph_seed(sample), spec.traffic_seed(sample, lam)
    try:
        g, caches = _graph_for(spec.net, gs)
        cache = caches.setdefault((router, spec.net.k), {}) if router != "proposed" else None
        res = run(
            gs,
            ts,
            router,
            policy,
            spec.traffic(lam),
            net=spec.net,
            graph=g,
            candidate_cache=cache,
            timing=spec.timing,
            pooled_p=spec.pooled_p,
        )
    except Exception as exc:
        raise CampaignError(
            f"run failed: router={router} policy={policy} lambda={lam} sample={sample} graph_seed={gs} traffic_seed={ts}: {exc!r}"
        ) from exc
    res.days = []  # keep pickles small; summaries carry everything aggregated
    return res


def _task_star(args) -> tuple[int, int, RunResults]:
    spec, pop_index, sample, (router, policy, lam) = args
    return pop_index, sample, run_task(spec, router, policy, lam, sample)


def campaign(
    spec: CampaignSpec,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[PopulationResults]:
    """Run every population of ``spec``; output order is independent of ``jobs``."""
    pops = spec.populations()
    # graph-major order lets each worker reuse one graph and its candidate caches
    tasks = [(spec, pi, s, pops[pi]) for s in range(spec.samples) for pi in range(len(pops))]
    results: dict[tuple[int, int], RunResults] = {}
    if jobs <= 1:
        stream = map(_task_star, tasks)
        pool = None
    else:
        import multiprocessing

        pool = multiprocessing.get_context("spawn").Pool(jobs)
        stream = pool.imap_unordered(_task_star, tasks, chunksize=max(1, len(pops) // jobs))
    try:
        for done, (pi, s, res) in enumerate(stream, 1):
            results[(pi, s)] = res
            if progress is not None:
                progress(done, len(tasks))
    finally:
        if pool is not None:
            pool.terminate()
    return [aggregate([results[(pi, s)] for s in range(spec.samples)]) for pi in range(len(pops))]


# ---------------------------------------------------------------------------
# config and CSV


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> list[str]:
    return [x for x in (p.strip() for p in text.replace(",", " ").split()) if x]


def parse_area(text: str) -> tuple[float, float]:
    w, sep, h = text.lower().partition("x")
    if not sep:
        raise ValueError(f"area must look like 1000x1000, got {text!r}")
    return float(w), float(h)


def parse_campaign_config(text: str, **overrides) -> CampaignSpec:
    """``key = value`` lines; ``#`` starts a comment.  Unknown keys are errors."""
    net_kw: dict = {}
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = key.strip().replace("-", "_"), value.strip()
        try:
            if key == "routers":
                kw["routers"] = tuple(_list(value))
            elif key == "policies":
                kw["policies"] = tuple(_list(value))
            elif key in ("lambdas", "lambda"):
                kw["lambdas"] = tuple(float(x) for x in _list(value))
            elif key in ("samples", "seed", "days"):
                kw[key] = int(value)
            elif key in ("holding_days", "mean_slices"):
                kw[key] = float(value)
            elif key in ("timing", "pooled_p"):
                kw[key] = _bool(value)
            elif key in ("slices", "nodes", "k"):
                net_kw[key] = int(value)
            elif key == "limit_km":
                net_kw["limit_km"] = float(value)
            elif key == "limit_baselines":
                net_kw["limit_baselines"] = _bool(value)
            elif key == "area":
                net_kw["width"], net_kw["height"] = parse_area(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    net_over = {k: overrides.pop(k) for k in list(overrides) if k in NetworkConfig.__dataclass_fields__}
    net_kw.update(net_over)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return CampaignSpec(net=NetworkConfig(**net_kw), **kw)


CSV_METRICS = (
    ("utilization", "utilization"),
    ("p_establish", "p_establish"),
    ("active_connections", "active_connections"),
    ("capacity_served", "capacity_served"),
    ("length_km", "mean_connection_length"),
    ("slices", "mean_connection_slices"),
    ("edge_fragments", "mean_edge_fragments"),
    ("search_ops", "mean_search_ops"),
    ("relaxations", "mean_relaxations"),
)


def csv_header() -> list[str]:
    return (
        ["router", "policy", "lambda", "samples"]
        + [c for c, _ in CSV_METRICS]
        + ["min_search_seconds"]
        + [f"rse_{c}" for c, _ in CSV_METRICS]
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def csv_rows(results: Sequence[PopulationResults]) -> list[list[str]]:
    rows = []
    for p in results:
        rows.append(
            [p.router, p.policy, _fmt(p.lam), str(p.samples)]
            + [_fmt(p.mean[m]) for _, m in CSV_METRICS]
            + [_fmt(p.min_search_time)]
            + [_fmt(p.rse[m]) for _, m in CSV_METRICS]
        )
    return rows


def write_csv(results: Sequence[PopulationResults], fh) -> None:
    import csv

    w = csv.writer(fh, lineterminator="\n")
    w.writerow(csv_header())
    w.writerows(csv_rows(results))


def read_csv(fh) -> list[dict[str, str]]:
    import csv

    return list(csv.DictReader(fh))
