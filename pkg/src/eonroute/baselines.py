"""Spectrum-blind comparison routers.

Candidate paths come from classic Dijkstra, Yen's K shortest loopless paths or
successive edge-disjoint shortest paths; :func:`route_over_candidates` then
tries them in order against the current spectrum.

Paths are tuples of edge ids.  Equal-cost ties are broken by the
lexicographically smallest edge-id sequence, which makes every generator
deterministic and lets Yen reproduce the (cost, edge sequence) total order
exactly.
"""

from __future__ import annotations

import heapq
from typing import Collection, Optional, Sequence

from .routing import Demand, RouteResult, SearchCounters
from .spectrum import SliceSet, trim_bits
from .topology import Multigraph

Path = tuple[int, ...]

_EMPTY: frozenset[int] = frozenset()


def dijkstra_sp(
    g: Multigraph,
    s: int,
    t: int,
    *,
    disabled_edges: Collection[int] = _EMPTY,
    disabled_links: Collection[int] = _EMPTY,
    disabled_nodes: Collection[int] = _EMPTY,
    counters: SearchCounters | None = None,
) -> Optional[tuple[Path, float]]:
    """Minimum-cost ``s``-``t`` path ignoring spectrum, or ``None``."""
    if s == t:
        raise ValueError("source and target must differ")
    best: dict[int, tuple[float, Path]] = {s: (0, ())}
    done: set[int] = set()
    heap: list[tuple[float, Path, int]] = [(0, (), s)]
    adjacency = g.adjacency
    pops = relax = 0
    found = None
    while heap:
        d, path, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        pops += 1
        if v == t:
            found = (path, d)
            break
        for e in adjacency[v]:
            u = e.target
            if u in done or u in disabled_nodes or e.id in disabled_edges or e.link in disabled_links:
                continue
            relax += 1
            key = (d + e.cost, path + (e.id,))
            old = best.get(u)
            if old is None or key < old:
                best[u] = key
                heapq.heappush(heap, (key[0], key[1], u))
    if counters is not None:
        counters.queue_pops += pops
        counters.relaxations += relax
    return found


def yen_ksp(
    g: Multigraph,
    s: int,
    t: int,
    K: int,
    *,
    counters: SearchCounters | None = None,
) -> list[tuple[Path, float]]:
    """Up to ``K`` cheapest loopless paths, ordered by (cost, edge sequence)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    first = dijkstra_sp(g, s, t, counters=counters)
    if first is None:
        return []
    accepted: list[tuple[Path, float]] = [first]
    seen: set[Path] = {first[0]}
    pending: list[tuple[float, Path]] = []
    edges = g.edges
    while len(accepted) < K:
        prev, _ = accepted[-1]
        nodes = g.path_nodes(prev)
        for i in range(len(prev)):
            root = prev[:i]
            blocked_edges = {p[i] for p, _ in accepted if len(p) > i and p[:i] == root}
            spur = dijkstra_sp(
                g,
                nodes[i],
                t,
                disabled_edges=blocked_edges,
                disabled_nodes=nodes[:i],
                counters=counters,
            )
            if spur is None:
                continue
            cand = root + spur[0]
            if cand not in seen:
                seen.add(cand)
                heapq.heappush(pending, (sum(edges[e].cost for e in cand), cand))
        if not pending:
            break
        cost, path = heapq.heappop(pending)
        accepted.append((path, cost))
    return accepted


def edge_disjoint_paths(
    g: Multigraph,
    s: int,
    t: int,
    *,
    counters: SearchCounters | None = None,
) -> list[tuple[Path, float]]:
    """Repeated shortest paths, each time with the links already used disabled."""
    disabled: set[int] = set()
    found = []
    while True:
        sp = dijkstra_sp(g, s, t, disabled_links=disabled, counters=counters)
        if sp is None:
            return found
        found.append(sp)
        disabled.update(g.edges[e].link for e in sp[0])


def route_over_candidates(
    g: Multigraph,
    candidates: Sequence[tuple[Path, float]],
    d: Demand,
    m: float | None,
    *,
    counters: SearchCounters | None = None,
) -> Optional[RouteResult]:
    """First candidate within ``m`` whose free spectrum supports ``d.n``.

    ``m=None`` disables the length cap.  Each inspected candidate counts as one
    probe in ``counters.probes``.
    """
    counters = counters if counters is not None else SearchCounters()
    for path, cost in candidates:
        if m is not None and cost > m:
            continue
        counters.probes += 1
        bits = trim_bits(g.path_bits(path), d.n)
        if bits:
            return RouteResult(tuple(path), SliceSet(bits, g.omega), cost, counters)
    return None
