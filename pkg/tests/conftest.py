from __future__ import annotations

import random
from pathlib import Path

import pytest

from eonroute.spectrum import SliceSet
from eonroute.topology import Multigraph

DATA = Path(__file__).parent / "data"

# one line per acceptance criterion, echoed in the terminal summary
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(VERDICTS, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def one_based(*slices: int) -> list[int]:
    """Hand-drawn slice numbers start at 1; library indices start at 0."""
    return [s - 1 for s in slices]


def decoy_graph() -> Multigraph:
    # s=0, i=1, t=2; arcs e1, e2 (parallel s->i) and e3 (i->t)
    g = Multigraph(4)
    for _ in range(3):
        g.add_node()
    g.add_arc(0, 1, 1, SliceSet.of(one_based(1, 2), 4))
    g.add_arc(0, 1, 2, SliceSet.of(one_based(2, 3), 4))
    g.add_arc(1, 2, 10, SliceSet.of(one_based(2, 3), 4))
    return g


def purge_graph() -> Multigraph:
    g = Multigraph(4)
    for _ in range(3):
        g.add_node()
    g.add_arc(0, 1, 1, SliceSet.of(one_based(1, 2), 4))
    g.add_arc(0, 1, 1, SliceSet.of(one_based(1, 2, 3), 4))
    g.add_arc(1, 2, 1, SliceSet.of(one_based(1, 2, 3), 4))
    return g


@pytest.fixture
def decoy():
    return decoy_graph()


@pytest.fixture
def purge():
    return purge_graph()


def random_instance(rng: random.Random, omega: int = 8, max_nodes: int = 8, max_links: int = 12, density: float = 0.6):
    """Small random multigraph: undirected links (some parallel) plus a few one-way arcs."""
    nodes = rng.randint(2, max_nodes)
    g = Multigraph(omega)
    for _ in range(nodes):
        g.add_node()
    for _ in range(rng.randint(1, max_links)):
        u, v = rng.sample(range(nodes), 2)
        bits = 0
        for i in range(omega):
            if rng.random() < density:
                bits |= 1 << i
        cost = rng.randint(1, 10)
        if rng.random() < 0.8:
            g.add_link(u, v, cost, bits)
        else:
            g.add_arc(u, v, cost, bits)
    s, t = rng.sample(range(nodes), 2)
    return g, s, t


def naive_longest_run(members, omega: int) -> int:
    best = run = 0
    for i in range(omega):
        run = run + 1 if i in members else 0
        best = max(best, run)
    return best


def naive_trim(members, omega: int, n: int) -> set[int]:
    out, run = set(), []
    for i in range(omega + 1):
        if i < omega and i in members:
            run.append(i)
        else:
            if len(run) >= n:
                out.update(run)
            run = []
    return out


def simple_paths(g: Multigraph, s: int, t: int):
    """Every loop-free s-t path as a tuple of edge ids (exhaustive DFS)."""
    out = []

    def dfs(v, seen, path):
        if v == t:
            out.append(tuple(path))
            return
        for e in g.adjacency[v]:
            if e.target not in seen:
                seen.add(e.target)
                path.append(e.id)
                dfs(e.target, seen, path)
                path.pop()
                seen.discard(e.target)

    dfs(s, {s}, [])
    return out


def brute_force_route(g: Multigraph, s: int, t: int, n: int, m: float):
    """Min cost over simple paths within m whose trimmed common spectrum supports n."""
    best = None
    for p in simple_paths(g, s, t):
        cost = sum(g.edges[e].cost for e in p)
        if cost > m:
            continue
        common = set(range(g.omega))
        for e in p:
            common &= {i for i in range(g.omega) if g.avail[g.edges[e].link] >> i & 1}
        if naive_longest_run(common, g.omega) >= n and (best is None or cost < best):
            best = cost
    return best


def brute_force_ksp(g: Multigraph, s: int, t: int, k: int):
    paths = [(sum(g.edges[e].cost for e in p), p) for p in simple_paths(g, s, t)]
    paths.sort()
    return [(p, c) for c, p in paths[:k]]
