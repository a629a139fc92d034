"""Directed multigraph with shared per-link spectrum pools.

An undirected fibre link is stored once as a :class:`Link` that owns the
available-slice mask, and realized as two opposing arcs (:class:`Edge`) that
both point at it.  Edge and node ids are dense so search code can index plain
lists.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .spectrum import AllocationError, SliceSet, Slot, fragment_count_bits

DEFAULT_SLICES = 400


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    source: int
    target: int
    cost: float
    link: int


@dataclass
class Link:
    id: int
    u: int
    v: int
    length: float
    graph: "Multigraph" = field(repr=False, compare=False)

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)

    @property
    def available(self) -> SliceSet:
        return SliceSet(self.graph.avail[self.id], self.graph.omega)


class Multigraph:
    """Arc-level multigraph.  ``avail[link_id]`` is the authoritative free mask."""

    def __init__(self, omega: int = DEFAULT_SLICES):
        if omega < 1:
            raise ValueError("omega must be >= 1")
        self.omega = omega
        self.full_mask = (1 << omega) - 1
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.links: list[Link] = []
        self.adjacency: list[list[Edge]] = []
        self.avail: list[int] = []
        self._arc_table = None

    # -- construction -------------------------------------------------------

    def add_node(self, x: float = 0.0, y: float = 0.0) -> int:
        node = Node(len(self.nodes), float(x), float(y))
        self.nodes.append(node)
        self.adjacency.append([])
        self._arc_table = None
        return node.id

    def _new_link(self, u: int, v: int, length: float, available: SliceSet | int | None) -> Link:
        self._check_node(u)
        self._check_node(v)
        if length < 0:
            raise ValueError("edge cost must be non-negative")
        if available is None:
            mask = self.full_mask
        elif isinstance(available, SliceSet):
            if available.omega != self.omega:
                raise ValueError("slice universe mismatch")
            mask = available.bits
        else:
            mask = int(available)
            if mask < 0 or mask >> self.omega:
                raise ValueError("available mask outside universe")
        link = Link(len(self.links), u, v, length, self)
        self.links.append(link)
        self.avail.append(mask)
        return link

    def _new_edge(self, source: int, target: int, cost: float, link: int) -> Edge:
        edge = Edge(len(self.edges), source, target, cost, link)
        self.edges.append(edge)
        self.adjacency[source].append(edge)
        self._arc_table = None
        return edge

    def add_link(self, u: int, v: int, length: float, available: SliceSet | int | None = None) -> Link:
        """Undirected link: one spectrum pool, two arcs (u->v gets the lower id)."""
        link = self._new_link(u, v, length, available)
        self._new_edge(u, v, length, link.id)
        self._new_edge(v, u, length, link.id)
        return link

    def add_arc(self, u: int, v: int, cost: float, available: SliceSet | int | None = None) -> Edge:
        """A one-way arc with a private spectrum pool (used for hand-built digraphs)."""
        link = self._new_link(u, v, cost, available)
        return self._new_edge(u, v, cost, link.id)

    def _check_node(self, v: int) -> None:
        if not 0 <= v < len(self.nodes):
            raise IndexError(f"no node {v}")

    # -- queries ------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def out_edges(self, v: int) -> Iterator[Edge]:
        self._check_node(v)
        return iter(self.adjacency[v])

    def arc_table(self) -> tuple[list[list[tuple[int, int, float, int]]], list[int]]:
        """Per-node ``(edge, target, cost, link)`` tuples and edge targets, for hot loops."""
        if self._arc_table is None:
            adj = [[(e.id, e.target, e.cost, e.link) for e in out] for out in self.adjacency]
            self._arc_table = (adj, [e.target for e in self.edges])
        return self._arc_table

    def link_of(self, edge_id: int) -> Link:
        return self.links[self.edges[edge_id].link]

    def available(self, edge_id: int) -> SliceSet:
        return SliceSet(self.avail[self.edges[edge_id].link], self.omega)

    def path_cost(self, path: Sequence[int]) -> float:
        return sum(self.edges[e].cost for e in path)

    def path_nodes(self, path: Sequence[int]) -> list[int]:
        if not path:
            return []
        nodes = [self.edges[path[0]].source]
        for e in path:
            edge = self.edges[e]
            if edge.source != nodes[-1]:
                raise ValueError(f"path is not contiguous at edge {e}")
            nodes.append(edge.target)
        return nodes

    def path_links(self, path: Sequence[int]) -> list[int]:
        """Distinct links along ``path`` in order (parallel-arc sharing collapses)."""
        seen: dict[int, None] = {}
        for e in path:
            seen.setdefault(self.edges[e].link, None)
        return list(seen)

    def path_bits(self, path: Sequence[int]) -> int:
        bits = self.full_mask
        for e in path:
            bits &= self.avail[self.edges[e].link]
        return bits

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def used_slices(self) -> int:
        return self.omega * len(self.links) - self.free_slices()

    def free_slices(self) -> int:
        return sum(m.bit_count() for m in self.avail)

    def utilization(self) -> float:
        if not self.links:
            return 0.0
        return self.used_slices() / (self.omega * len(self.links))

    def mean_fragments(self) -> float:
        if not self.links:
            return 0.0
        return sum(fragment_count_bits(m) for m in self.avail) / len(self.links)

    def reset_spectrum(self) -> None:
        self.avail = [self.full_mask] * len(self.links)

    def copy(self) -> "Multigraph":
        g = Multigraph(self.omega)
        g.nodes = list(self.nodes)
        g.edges = list(self.edges)
        g.adjacency = [list(a) for a in self.adjacency]
        g.links = [Link(l.id, l.u, l.v, l.length, g) for l in self.links]
        g.avail = list(self.avail)
        g._arc_table = self._arc_table
        return g

    # -- connection lifecycle ----------------------------------------------

    def allocate(self, path: Sequence[int], slot: Slot) -> None:
        """Take ``slot`` on every link of ``path``; all-or-nothing."""
        mask = self._slot_mask(slot)
        links = self.path_links(path)
        for lid in links:
            if self.avail[lid] & mask != mask:
                raise AllocationError(f"slot {tuple(slot)} not free on link {lid}")
        for lid in links:
            self.avail[lid] &= ~mask

    def release(self, path: Sequence[int], slot: Slot) -> None:
        mask = self._slot_mask(slot)
        links = self.path_links(path)
        for lid in links:
            if self.avail[lid] & mask:
                raise AllocationError(f"slot {tuple(slot)} not allocated on link {lid}")
        for lid in links:
            self.avail[lid] |= mask

    def _slot_mask(self, slot: Slot) -> int:
        if slot.length < 1 or slot.start < 0 or slot.start + slot.length > self.omega:
            raise AllocationError(f"slot {tuple(slot)} outside [0, {self.omega})")
        return slot.mask

    # -- text interchange ---------------------------------------------------

    def dump(self, fh: TextIO) -> None:
        fh.write(f"graph {len(self.nodes)} {self.omega}\n")
        for node in self.nodes:
            fh.write(f"node {node.id} {node.x!r} {node.y!r}\n")
        for link in self.links:
            arcs = [e for e in self.edges if e.link == link.id]
            kind = "link" if len(arcs) == 2 else "arc"
            sset = SliceSet(self.avail[link.id], self.omega).format() or "-"
            fh.write(f"{kind} {link.id} {link.u} {link.v} {_num(link.length)} {sset}\n")

    def dumps(self) -> str:
        import io

        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()

    @classmethod
    def load(cls, fh: Iterable[str]) -> "Multigraph":
        """Parse the format written by :meth:`dump`.  Raises ``ValueError``."""
        g: Multigraph | None = None
        expected_nodes = 0
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                if tok[0] == "graph":
                    if g is not None:
                        raise ValueError("duplicate header")
                    expected_nodes, omega = int(tok[1]), int(tok[2])
                    g = cls(omega)
                    continue
                if g is None:
                    raise ValueError("missing 'graph <nodes> <slices>' header")
                if tok[0] == "node":
                    nid = int(tok[1])
                    if nid != len(g.nodes):
                        raise ValueError(f"node ids must be dense, got {nid}")
                    x = float(tok[2]) if len(tok) > 2 else 0.0
                    y = float(tok[3]) if len(tok) > 3 else 0.0
                    g.add_node(x, y)
                elif tok[0] in ("link", "arc"):
                    lid, u, v = int(tok[1]), int(tok[2]), int(tok[3])
                    if lid != len(g.links):
                        raise ValueError(f"link ids must be dense, got {lid}")
                    cost = float(tok[4])
                    sset = SliceSet.parse(tok[5], g.omega) if len(tok) > 5 else None
                    if tok[0] == "link":
                        g.add_link(u, v, cost, sset)
                    else:
                        g.add_arc(u, v, cost, sset)
                else:
                    raise ValueError(f"unknown record {tok[0]!r}")
            except (IndexError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if g is None:
            raise ValueError("empty graph file")
        if len(g.nodes) != expected_nodes:
            raise ValueError(f"header declares {expected_nodes} nodes, found {len(g.nodes)}")
        return g

    @classmethod
    def loads(cls, text: str) -> "Multigraph":
        return cls.load(text.splitlines())


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# ---------------------------------------------------------------------------
# Gabriel graphs


def gabriel_links(points: np.ndarray) -> list[tuple[int, int]]:
    """Pairs ``(i, j)``, ``i < j``, whose closed diametral disk holds no other point."""
    n = len(points)
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(-1)
    pairs = []
    for i in range(n - 1):
        for j in range(i + 1, n):
            # k lies in the closed disk on diameter ij  <=>  |ki|^2 + |kj|^2 <= |ij|^2
            s = d2[i] + d2[j]
            s[i] = s[j] = np.inf
            if not (s <= d2[i, j]).any():
                pairs.append((i, j))
    return pairs


def gabriel_generate(
    node_count: int = 100,
    width: float = 1000.0,
    height: float = 1000.0,
    slices_per_link: int = DEFAULT_SLICES,
    rng: np.random.Generator | int | None = None,
) -> Multigraph:
    """Random Gabriel graph over a ``width`` x ``height`` km area."""
    if node_count < 2:
        raise ValueError("node_count must be >= 2")
    if width <= 0 or height <= 0:
        raise ValueError("area must be positive")
    rng = np.random.default_rng(rng)
    points = np.empty((node_count, 2))
    seen: set[tuple[float, float]] = set()
    for i in range(node_count):
        while True:
            p = (float(rng.uniform(0.0, width)), float(rng.uniform(0.0, height)))
            if p not in seen:
                break
        seen.add(p)
        points[i] = p

    g = Multigraph(slices_per_link)
    for x, y in points:
        g.add_node(x, y)
    for i, j in gabriel_links(points):
        dist = math.dist(points[i], points[j])
        g.add_link(i, j, max(1, int(round(dist))))
    if not is_connected(g):
        raise AssertionError("generated Gabriel graph is disconnected")
    return g


def is_connected(g: Multigraph) -> bool:
    if not g.nodes:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for e in g.adjacency[v]:
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return len(seen) == len(g.nodes)


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class Summary:
    min: float
    mean: float
    max: float
    variance: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Summary":
        if len(values) == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan)
        arr = np.asarray(values, dtype=float)
        # population variance; Table-style summaries over a complete set
        return cls(float(arr.min()), float(arr.mean()), float(arr.max()), float(arr.var()))


@dataclass(frozen=True)
class GraphStats:
    links: Summary
    link_length: Summary
    degree: Summary
    sp_length: Summary
    sp_hops: Summary

    ROWS = (
        ("Number of links", "links"),
        ("Link length", "link_length"),
        ("Node degree", "degree"),
        ("SP length", "sp_length"),
        ("SP hops", "sp_hops"),
    )

    def table(self) -> str:
        lines = [f"{'value':<16}{'min':>12}{'average':>12}{'max':>12}{'variance':>14}"]
        for title, attr in self.ROWS:
            s: Summary = getattr(self, attr)
            lines.append(f"{title:<16}{s.min:>12.6g}{s.mean:>12.6g}{s.max:>12.6g}{s.variance:>14.6g}")
        return "\n".join(lines)


def _undirected_degrees(g: Multigraph) -> list[int]:
    deg = [0] * len(g.nodes)
    for link in g.links:
        deg[link.u] += 1
        deg[link.v] += 1
    return deg


def shortest_path_samples(g: Multigraph) -> tuple[list[float], list[int]]:
    """(km, hops) over all reachable ordered pairs, hops taken on the km-shortest path.

    Among equal-km paths the one with fewer hops is used.
    """
    lengths: list[float] = []
    hops: list[int] = []
    for s in range(len(g.nodes)):
        dist = {s: (0.0, 0)}
        done: set[int] = set()
        heap = [(0.0, 0, s)]
        while heap:
            d, h, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            if v != s:
                lengths.append(d)
                hops.append(h)
            for e in g.adjacency[v]:
                cand = (d + e.cost, h + 1)
                old = dist.get(e.target)
                if old is None or cand < old:
                    dist[e.target] = cand
                    heapq.heappush(heap, (cand[0], cand[1], e.target))
    return lengths, hops


def graph_stats(g: Multigraph) -> GraphStats:
    return population_stats([g])


def population_stats(graphs: Sequence[Multigraph]) -> GraphStats:
    """Pooled statistics over several graphs (link count summarized per graph)."""
    counts, lengths, degrees, sp_len, sp_hops = [], [], [], [], []
    for g in graphs:
        counts.append(len(g.links))
        lengths.extend(l.length for l in g.links)
        degrees.extend(_undirected_degrees(g))
        a, b = shortest_path_samples(g)
        sp_len.extend(a)
        sp_hops.extend(b)
    return GraphStats(
        links=Summary.of(counts),
        link_length=Summary.of(lengths),
        degree=Summary.of(degrees),
        sp_length=Summary.of(sp_len),
        sp_hops=Summary.of(sp_hops),
    )
