"""Spectrum-aware, length-limited label-setting shortest path search.

Nodes carry *sets* of labels ``(cost, incoming edge, slice set)``.  A
candidate label is relaxed onto a node only if no label already there is
better-or-equal (cheaper-or-equal *and* a superset of slices); on relaxation
every label the candidate is better-or-equal to is purged.  The queue holds
unique ``(cost, edge)`` pairs, so a node may be visited several times, once per
incoming (cost, edge) that still carries live labels.

Internally labels are plain tuples ``(cost, edge, bits, parent)`` where
``bits`` is the slice mask and ``parent`` the label it was relaxed from; this
keeps the inner loop free of attribute lookups.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .spectrum import SliceSet, members_of_bits, trim_bits
from .topology import Multigraph

NULL_EDGE = -1


@dataclass(frozen=True)
class Demand:
    source: int
    target: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"demand needs at least one slice, got n={self.n}")
        if self.source == self.target:
            raise ValueError("demand source and target must differ")


class Label(NamedTuple):
    cost: float
    edge: int
    ssc: SliceSet


def better_or_equal(l1: Label, l2: Label) -> bool:
    """``l1 <= l2``: no more expensive and offering a superset of slices."""
    return l1.cost <= l2.cost and l2.ssc.bits & ~l1.ssc.bits == 0


@dataclass
class SearchCounters:
    labels_created: int = 0
    labels_purged: int = 0
    queue_pops: int = 0
    relaxations: int = 0
    probes: int = 0

    def __iadd__(self, other: "SearchCounters") -> "SearchCounters":
        self.labels_created += other.labels_created
        self.labels_purged += other.labels_purged
        self.queue_pops += other.queue_pops
        self.relaxations += other.relaxations
        self.probes += other.probes
        return self

    @property
    def operations(self) -> int:
        return self.queue_pops + self.relaxations


@dataclass
class RouteResult:
    path: tuple[int, ...]
    sigma: SliceSet
    cost: float
    counters: SearchCounters = field(default_factory=SearchCounters)
    labels: Optional[dict[int, list[Label]]] = field(default=None, repr=False)
    visits: Optional[list[int]] = field(default=None, repr=False)


class SearchTrace:
    """Debug record filled by :func:`search` when passed in."""

    def __init__(self) -> None:
        self.labels: dict[int, list[Label]] = {}
        self.visits: list[int] = []
        self.popped_costs: list[float] = []
        self.exhausted_target_cost: Optional[float] = None
        self.counters = SearchCounters()


def _antichain_violation(labels: list) -> Optional[tuple]:
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            if (a[0] <= b[0] and b[2] & ~a[2] == 0) or (b[0] <= a[0] and a[2] & ~b[2] == 0):
                return (a[:3], b[:3])
    return None


def search(
    g: Multigraph,
    d: Demand,
    m: float,
    *,
    trace: SearchTrace | None = None,
    check_invariants: bool = False,
    counters: SearchCounters | None = None,
) -> Optional[RouteResult]:
    """Shortest path from ``d.source`` to ``d.target`` no longer than ``m`` whose
    common free spectrum holds ``d.n`` contiguous slices.

    Returns ``None`` if no such path exists.  ``sigma`` holds every fragment of
    at least ``n`` slices free along the returned path.

    With a :class:`SearchTrace` the search runs to queue exhaustion (the result
    is still the first target pop) and records label sets and visit counts.
    ``check_invariants`` asserts the per-node antichain after every relaxation.
    ``counters``, if given, is incremented even when no path is found.
    """
    if m <= 0:
        raise ValueError("length limit must be positive")
    s, t, n = d.source, d.target, d.n
    adj, target_of = g.arc_table()
    if not (0 <= s < len(adj) and 0 <= t < len(adj)):
        raise IndexError("demand endpoints not in graph")
    avail = g.avail
    exhaust = trace is not None

    # label = [cost, edge, bits, parent, nodes-on-path mask, alive]
    root = [0, NULL_EDGE, g.full_mask, None, 1 << s, True]
    labels: list[list[list]] = [[] for _ in adj]
    labels[s].append(root)
    by_key: dict[tuple[float, int], list[list]] = {(0, NULL_EDGE): [root]}
    heap: list[tuple[float, int]] = [(0, NULL_EDGE)]
    queued = {(0, NULL_EDGE)}
    created = 1
    purged = pops = relaxations = 0
    winner = None
    visits = [0] * len(adj) if exhaust else None
    popped = [] if exhaust else None
    heappush, heappop = heapq.heappush, heapq.heappop

    while heap:
        key = heappop(heap)
        queued.discard(key)
        c, e = key
        pops += 1
        if exhaust:
            popped.append(c)
        current = [lab for lab in by_key.pop(key, ()) if lab[5]]
        if not current:
            # every label behind this element was purged after the push
            continue
        v = s if e == NULL_EDGE else target_of[e]
        if exhaust:
            visits[v] += 1
        if v == t and winner is None:
            winner = current
            if not exhaust:
                break
        out = adj[v]
        for lab in current:
            bits = lab[2]
            onpath = lab[4]
            for e2, v2, w, link in out:
                if onpath >> v2 & 1:
                    # loop: the label this path left v2 with dominates the candidate
                    continue
                c2 = c + w
                if c2 > m:
                    continue
                b2 = bits & avail[link]
                if b2 != bits:
                    b2 = trim_bits(b2, n)
                    if not b2:
                        continue
                relaxations += 1
                there = labels[v2]
                for old in there:
                    if old[0] <= c2 and b2 & ~old[2] == 0:
                        break
                else:
                    dead = [old for old in there if c2 <= old[0] and old[2] & ~b2 == 0]
                    if dead:
                        for old in dead:
                            old[5] = False
                        purged += len(dead)
                        there = labels[v2] = [old for old in there if old[5]]
                    new = [c2, e2, b2, lab, onpath | 1 << v2, True]
                    there.append(new)
                    created += 1
                    if check_invariants:
                        bad = _antichain_violation(there)
                        assert bad is None, f"antichain broken at node {v2}: {bad}"
                    k2 = (c2, e2)
                    bucket = by_key.get(k2)
                    if bucket is None:
                        by_key[k2] = [new]
                    else:
                        bucket.append(new)
                    if k2 not in queued:
                        queued.add(k2)
                        heappush(heap, k2)

    done = SearchCounters(created, purged, pops, relaxations)
    if counters is not None:
        counters += done
    counters = done
    if trace is not None:
        omega = g.omega
        trace.counters = counters
        trace.visits = visits
        trace.popped_costs = popped
        trace.labels = {
            v: [Label(l[0], l[1], SliceSet(l[2], omega)) for l in ls] for v, ls in enumerate(labels) if ls
        }
        if labels[t]:
            trace.exhausted_target_cost = min(l[0] for l in labels[t])
    if winner is None:
        return None
    path, bits, cost = _trace(winner)
    result = RouteResult(tuple(path), SliceSet(bits, g.omega), cost, counters)
    if trace is not None:
        result.labels = trace.labels
        result.visits = trace.visits
    return result


def _trace(winners: list[tuple]) -> tuple[list[int], int, float]:
    """Walk parent references back from the winning target label.

    ``winners`` are the target's labels for the first popped (cost, edge); ties
    between them go to the lexicographically smallest member list.
    """
    if not winners:
        raise RuntimeError("target popped without live labels")
    best = winners[0] if len(winners) == 1 else min(winners, key=lambda l: members_of_bits(l[2]))
    path = []
    lab = best
    while lab[1] != NULL_EDGE:
        path.append(lab[1])
        lab = lab[3]
        if lab is None:
            raise RuntimeError("broken predecessor chain")
    path.reverse()
    return path, best[2], best[0]
