import random

import pytest

from eonroute.baselines import dijkstra_sp, edge_disjoint_paths, route_over_candidates, yen_ksp
from eonroute.routing import Demand, SearchCounters, search
from eonroute.spectrum import SliceSet
from eonroute.topology import Multigraph

from .conftest import brute_force_ksp, random_instance


def graph(n_nodes, links, omega=8):
    g = Multigraph(omega)
    for _ in range(n_nodes):
        g.add_node()
    for u, v, c in links:
        g.add_link(u, v, c)
    return g


def test_dijkstra_triangle_and_disconnected():
    g = graph(4, [(0, 1, 1), (1, 2, 1), (0, 2, 3)])
    path, cost = dijkstra_sp(g, 0, 2)
    assert cost == 2 and g.path_nodes(path) == [0, 1, 2]
    assert dijkstra_sp(g, 0, 3) is None
    with pytest.raises(ValueError):
        dijkstra_sp(g, 1, 1)


def test_dijkstra_tie_break_by_edge_sequence():
    g = graph(2, [(0, 1, 4), (0, 1, 4)])
    assert dijkstra_sp(g, 0, 1) == ((0,), 4)
    assert dijkstra_sp(g, 1, 0) == ((1,), 4)


def test_yen_two_paths_and_k1():
    g = graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)])
    out = yen_ksp(g, 0, 3, 10)
    assert [c for _, c in out] == [2, 4]
    assert yen_ksp(g, 0, 3, 1) == [dijkstra_sp(g, 0, 3)]
    with pytest.raises(ValueError):
        yen_ksp(g, 0, 3, 0)


def test_yen_matches_brute_force():
    rng = random.Random(5)
    for _ in range(300):
        g, s, t = random_instance(rng)
        k = rng.randint(1, 10)
        got = yen_ksp(g, s, t, k)
        assert got == brute_force_ksp(g, s, t, k)
        assert len({p for p, _ in got}) == len(got)


def test_edge_disjoint_examples():
    g = graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)])
    out = edge_disjoint_paths(g, 0, 3)
    assert [c for _, c in out] == [2, 4]
    bridge = graph(4, [(0, 1, 1), (0, 1, 2), (1, 2, 1), (2, 3, 1), (2, 3, 1)])
    assert len(edge_disjoint_paths(bridge, 0, 3)) == 1


def test_edge_disjoint_properties():
    rng = random.Random(6)
    for _ in range(300):
        g, s, t = random_instance(rng)
        out = edge_disjoint_paths(g, s, t)
        used = [set(g.path_links(p)) for p, _ in out]
        for i, a in enumerate(used):
            for b in used[i + 1 :]:
                assert not a & b
        costs = [c for _, c in out]
        assert costs == sorted(costs)
        assert len(out) <= min(g.degree(s), sum(e.target == t for e in g.edges))


def test_route_over_candidates_stops_at_first_feasible():
    g = graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)])
    cands = yen_ksp(g, 0, 3, 10)
    c = SearchCounters()
    res = route_over_candidates(g, cands, Demand(0, 3, 2), 100, counters=c)
    assert res.path == cands[0][0] and c.probes == 1
    g.avail[0] = 0
    c = SearchCounters()
    res = route_over_candidates(g, cands, Demand(0, 3, 2), 100, counters=c)
    assert res.path == cands[1][0] and c.probes == 2
    # the cost-4 candidate exceeds m and is skipped without a probe
    c = SearchCounters()
    assert route_over_candidates(g, cands, Demand(0, 3, 2), 3, counters=c) is None
    assert c.probes == 1
    assert route_over_candidates(g, cands, Demand(0, 3, 9), None) is None


def test_decoy_blocks_spectrum_blind_routers(decoy):
    d = Demand(0, 2, 2)
    assert route_over_candidates(decoy, [dijkstra_sp(decoy, 0, 2)], d, 100) is None
    assert route_over_candidates(decoy, edge_disjoint_paths(decoy, 0, 2), d, 100) is None
    assert search(decoy, d, 100).path == (1, 2)


def test_proposed_dominates_baselines():
    rng = random.Random(7)
    for _ in range(300):
        g, s, t = random_instance(rng)
        d = Demand(s, t, rng.randint(1, 3))
        best = search(g, d, 1000)
        for cands in (yen_ksp(g, s, t, 10), edge_disjoint_paths(g, s, t)):
            res = route_over_candidates(g, cands, d, 1000)
            if res is not None:
                assert best is not None and best.cost <= res.cost
                assert res.sigma == SliceSet(res.sigma.bits, g.omega)
