"""Greedy routing: variants, invariants, batch determinism, trace CSV."""

import numpy as np
import pytest

from fgsw import (HighwayOverlay, OverlayParams, RoutingError, build_overlay,
                  gen_lattice, gen_sierpinski, route, route_batch,
                  validate_trace, write_trace_csv)
from fgsw.graph import Graph
from fgsw.rng import substream

VARIANTS = ("plain", "highway-sticky", "highway-aware")


def overlay_with(graph, highway_ids, seed=0):
    """Overlay with a hand-picked highway set (contacts still sampled)."""
    flags = np.zeros(graph.n, dtype=bool)
    flags[list(highway_ids)] = True
    return HighwayOverlay(graph, OverlayParams(k=2, q=1, s=1, seed=seed),
                          flags, 0)


def random_pairs(n, count, seed):
    stream = substream(seed, 7)
    pairs = []
    while len(pairs) < count:
        s, t = (int(x) for x in stream.integers(0, n, size=2))
        if s != t:
            pairs.append((s, t))
    return pairs


# -- single-walk behavior -----------------------------------------------------


def test_source_equals_target_zero_hops():
    g = gen_lattice(1, 8)
    ov = overlay_with(g, [0, 4])
    for variant in VARIANTS:
        tr = route(g, ov, 3, 3, variant)
        assert tr.hops == 0 and tr.path == [3] and tr.dist_st == 0


def test_plain_pure_local_when_highway_is_elsewhere():
    # highway nodes on the far side never help a 0 -> 8 walk
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [16, 17])
    tr = route(g, ov, 0, 8, "plain")
    assert tr.path == list(range(9))
    assert tr.hops == 8 == tr.dist_st
    assert all(k == "local" for k in tr.edge_kinds)


def test_plain_takes_strictly_better_contact():
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [0, 16])
    assert list(ov.contacts(0)) == [16]
    tr = route(g, ov, 0, 15, "plain")
    assert tr.path == [0, 16, 15]
    assert tr.edge_kinds == ["long-range", "local"]


def test_plain_tie_prefers_lower_id():
    # local neighbor 1 and contact 3 both sit at distance 1 from target 2
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [0, 3])
    tr = route(g, ov, 0, 2, "plain")
    assert tr.path == [0, 1, 2]


def test_sticky_three_phases_on_ring():
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [0, 16])
    tr = route(g, ov, 1, 17, "highway-sticky")
    assert tr.path == [1, 0, 16, 17]
    assert tr.edge_kinds == ["local", "long-range", "local"]
    assert tr.phases == ["to-highway", "on-highway", "to-target"]
    assert (tr.hops_to_highway, tr.hops_on_highway, tr.hops_to_target) \
        == (1, 1, 1)


def test_aware_pointer_phase_may_move_away_from_target():
    # target is left of the source, the only highway nodes are right
    g = gen_lattice(1, 7, wrap=False)
    ov = overlay_with(g, [5, 6])
    tr = route(g, ov, 2, 0, "highway-aware")
    assert tr.path == [2, 3, 4, 5, 4, 3, 2, 1, 0]
    assert tr.hops == 8 > tr.dist_st == 2
    assert tr.phases[:3] == ["to-highway"] * 3
    assert tr.phases[3:] == ["to-target"] * 5
    # sticky never detours: greedy-local reaches the target first
    st = route(g, ov, 2, 0, "highway-sticky")
    assert st.path == [2, 1, 0]


def test_route_accepts_precomputed_distance_row():
    g = gen_lattice(2, 8)
    ov = build_overlay(g, OverlayParams(k=3, q=2, s=2, seed=4))
    row = g.distance_row(9)
    a = route(g, ov, 60, 9, "highway-sticky")
    b = route(g, ov, 60, 9, "highway-sticky", dist_to_target=row)
    assert a.path == b.path


def test_route_rejects_bad_arguments():
    g = gen_lattice(1, 8)
    ov = overlay_with(g, [0, 4])
    with pytest.raises(ValueError, match="unknown variant"):
        route(g, ov, 0, 1, "fastest")
    with pytest.raises(ValueError, match="out of range"):
        route(g, ov, 0, 8)
    with pytest.raises(ValueError, match="out of range"):
        route(g, ov, -1, 3)


# -- invariants over randomized instances --------------------------------------


def instance_pool():
    graphs = [gen_lattice(1, 64), gen_lattice(2, 8),
              gen_lattice(2, 7, wrap=False), gen_sierpinski(4)]
    for g in graphs:
        for seed in (1, 2):
            yield g, build_overlay(g, OverlayParams(k=3, q=2, s=2, seed=seed))


def test_invariants_across_variants():
    for g, ov in instance_pool():
        for s, t in random_pairs(g.n, 15, seed=g.n):
            dist_t = g.distance_row(t)
            for variant in VARIANTS:
                tr = route(g, ov, s, t, variant)
                assert tr.path[-1] == t
                assert tr.dist_st == dist_t[s]
                validate_trace(g, ov, tr)
                assert (tr.hops_to_highway + tr.hops_on_highway
                        + tr.hops_to_target) == tr.hops
                if variant != "highway-aware":
                    # every hop strictly decreases distance to target
                    d = dist_t[tr.path]
                    assert np.all(np.diff(d) < 0) or tr.hops == 0
                    assert tr.hops <= tr.dist_st


def test_aware_detour_bounded_by_highway_distance():
    for g, ov in instance_pool():
        hw_dist, _ = ov.nearest_highway()
        for s, t in random_pairs(g.n, 10, seed=g.n + 1):
            tr = route(g, ov, s, t, "highway-aware")
            assert tr.hops_to_highway <= hw_dist[s]
            assert tr.path[-1] == t


# -- validate_trace -------------------------------------------------------------


def test_validate_rejects_tampered_traces():
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [0, 16])
    tr = route(g, ov, 1, 17, "highway-sticky")

    bad = route(g, ov, 1, 17, "highway-sticky")
    bad.path[1] = 5  # 1 -> 5 is not an edge
    with pytest.raises(RoutingError, match="not a local edge"):
        validate_trace(g, ov, bad)

    bad = route(g, ov, 1, 17, "highway-sticky")
    bad.edge_kinds[0] = "long-range"  # node 1 is not even a highway node
    with pytest.raises(RoutingError, match="not a contact"):
        validate_trace(g, ov, bad)

    bad = route(g, ov, 1, 17, "highway-sticky")
    bad.source = 2
    with pytest.raises(RoutingError, match="endpoints"):
        validate_trace(g, ov, bad)

    bad = route(g, ov, 1, 17, "highway-sticky")
    bad.phases.append("to-target")
    with pytest.raises(RoutingError, match="out of sync"):
        validate_trace(g, ov, bad)

    validate_trace(g, ov, tr)  # untouched trace still validates


# -- batches ---------------------------------------------------------------------


def test_route_batch_empty():
    g = gen_lattice(1, 8)
    ov = overlay_with(g, [0, 4])
    assert route_batch(g, ov, []) == []


def test_route_batch_keeps_order_and_duplicates():
    g = gen_lattice(2, 8)
    ov = build_overlay(g, OverlayParams(k=3, q=2, s=2, seed=4))
    pairs = [(0, 9), (5, 40), (0, 9)]
    traces = route_batch(g, ov, pairs, "plain")
    assert [(t.source, t.target) for t in traces] == pairs
    assert traces[0].path == traces[2].path


def test_route_batch_rejects_bad_arguments():
    g = gen_lattice(1, 8)
    ov = overlay_with(g, [0, 4])
    with pytest.raises(ValueError, match="parallelism"):
        route_batch(g, ov, [(0, 1)], parallelism=0)
    with pytest.raises(ValueError, match="unknown variant"):
        route_batch(g, ov, [(0, 1)], variant="warp")


def test_route_batch_thread_count_never_changes_bytes(tmp_path):
    g = gen_lattice(2, 16)
    ov = build_overlay(g, OverlayParams(k=3, q=2, s=2, seed=5))
    pairs = random_pairs(g.n, 1000, seed=42)
    for variant in ("highway-sticky", "highway-aware"):
        p1 = tmp_path / f"{variant}-t1.csv"
        p8 = tmp_path / f"{variant}-t8.csv"
        write_trace_csv(route_batch(g, ov, pairs, variant, parallelism=1), p1)
        write_trace_csv(route_batch(g, ov, pairs, variant, parallelism=8), p8)
        assert p1.read_bytes() == p8.read_bytes()


def test_trace_csv_golden(tmp_path):
    g = gen_lattice(1, 32)
    ov = overlay_with(g, [0, 16])
    out = tmp_path / "t.csv"
    write_trace_csv(route_batch(g, ov, [(1, 17), (3, 3)], "highway-sticky"),
                    out)
    assert out.read_bytes() == (
        b"pair_id,source,target,variant,hops,hops_to_highway,"
        b"hops_on_highway,hops_to_target,dist_st\r\n"
        b"0,1,17,highway-sticky,3,1,1,1,16\r\n"
        b"1,3,3,highway-sticky,0,0,0,0,0\r\n")
