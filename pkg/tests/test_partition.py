import numpy as np
import pytest

from graphdp.graphs import WeightedGraph, distance_init, gen_clustered, gen_er
from graphdp.minplus import INF_SENTINEL, DistanceBlock, floyd_warshall_dense
from graphdp.partition import (
    BoundarySet,
    HierarchyError,
    Partition,
    PartitionError,
    build_boundary_graph,
    build_hierarchy,
    dump_partition,
    find_boundary,
    kway_partition,
    load_partition,
)


def _size_cap(n, k, imbalance=0.1):
    import math

    base = math.ceil(n / k)
    return max(base, int(base * (1 + imbalance)))


def _close_components(g, p):
    """Per-component closed distance blocks of the induced subgraphs."""
    d = distance_init(g)
    blocks = {}
    for c in range(p.k):
        ids = p.component(c)
        sub = d[np.ix_(ids, ids)]
        blocks[c] = DistanceBlock(floyd_warshall_dense(sub), ids)
    return blocks


def _cut_edges(g, assign):
    return int(np.sum(assign[g.src] != assign[g.dst]))


def two_cliques(m=50, w=1):
    edges = []
    for a in range(m):
        for b in range(m):
            if a != b:
                edges.append((a, b, w))
                edges.append((m + a, m + b, w))
    return WeightedGraph.from_edges(2 * m, edges)


def path_graph(n, w=1):
    edges = []
    for v in range(n - 1):
        edges.append((v, v + 1, w))
        edges.append((v + 1, v, w))
    return WeightedGraph.from_edges(n, edges)


def complete_graph(n, w=1):
    edges = [(a, b, w) for a in range(n) for b in range(n) if a != b]
    return WeightedGraph.from_edges(n, edges)


def ring_of_cliques(cliques=3, size=4, bridge_w=2):
    edges = []
    for c in range(cliques):
        off = c * size
        for a in range(size):
            for b in range(size):
                if a != b:
                    edges.append((off + a, off + b, 1))
    for c in range(cliques):
        u = c * size + (size - 1)
        v = ((c + 1) % cliques) * size
        edges.append((u, v, bridge_w))
        edges.append((v, u, bridge_w))
    return WeightedGraph.from_edges(cliques * size, edges)


# ---------------------------------------------------------------------------
# kway_partition
# ---------------------------------------------------------------------------


def test_kway_k1_puts_everything_in_one_component():
    g = gen_er(40, 0.1, seed=0)
    p = kway_partition(g, 1, seed=0)
    assert p.k == 1
    assert np.all(p.assign == 0)


def test_kway_kn_is_identity():
    g = gen_er(25, 0.1, seed=1)
    p = kway_partition(g, 25, seed=0)
    assert np.array_equal(np.sort(p.assign), np.arange(25))


def test_kway_covers_all_vertices_and_respects_cap():
    for seed in range(4):
        g = gen_er(200, 0.03, seed=seed)
        for k in (3, 7, 16):
            p = kway_partition(g, k, seed=seed)
            sizes = p.sizes()
            assert sizes.sum() == 200
            assert sizes.min() >= 1
            assert sizes.max() <= _size_cap(200, k)


def test_kway_deterministic_per_seed():
    g = gen_er(150, 0.04, seed=7)
    a = kway_partition(g, 6, seed=3).assign
    b = kway_partition(g, 6, seed=3).assign
    assert np.array_equal(a, b)


def test_kway_two_cliques_zero_cut():
    g = two_cliques(50)
    p = kway_partition(g, 2, seed=0)
    assert _cut_edges(g, p.assign) == 0
    assert np.array_equal(p.sizes(), [50, 50])


def test_kway_refinement_does_not_hurt():
    # the refined cut never exceeds the unrefined cut
    g = gen_er(120, 0.05, seed=9)
    rough = kway_partition(g, 5, seed=2, refine_passes=0)
    fine = kway_partition(g, 5, seed=2, refine_passes=2)
    assert _cut_edges(g, fine.assign) <= _cut_edges(g, rough.assign)


def test_kway_rejects_bad_k():
    g = gen_er(10, 0.2, seed=0)
    with pytest.raises(PartitionError):
        kway_partition(g, 0)
    with pytest.raises(PartitionError):
        kway_partition(g, 11)


def test_partition_components_listing():
    p = Partition(5, 2, np.array([0, 1, 0, 1, 0]))
    comps = p.components()
    assert np.array_equal(comps[0], [0, 2, 4])
    assert np.array_equal(comps[1], [1, 3])


# ---------------------------------------------------------------------------
# find_boundary
# ---------------------------------------------------------------------------


def test_find_boundary_matches_brute_force():
    for seed in range(6):
        g = gen_er(80, 0.04, seed=seed)
        p = kway_partition(g, 4, seed=seed)
        bs = find_boundary(g, p)
        expected = set()
        for u, v, _ in g.edges():
            if p.assign[u] != p.assign[v]:
                expected.add(u)
                expected.add(v)
        assert set(bs.union.tolist()) == expected
        for c, verts in bs.per_component.items():
            assert np.all(p.assign[verts] == c)
            assert np.all(np.diff(verts) > 0)


def test_find_boundary_union_sorted_unique():
    g = gen_er(60, 0.06, seed=3)
    p = kway_partition(g, 3, seed=1)
    bs = find_boundary(g, p)
    assert np.all(np.diff(bs.union) > 0)


def test_path_graph_boundary_stays_small():
    # contiguous regions on a path cut at most k-1 edges
    g = path_graph(100)
    p = kway_partition(g, 4, seed=0)
    bs = find_boundary(g, p)
    assert bs.union.size <= 6


# ---------------------------------------------------------------------------
# build_boundary_graph
# ---------------------------------------------------------------------------


def test_boundary_graph_preserves_boundary_distances():
    # closing the boundary graph must reproduce the full closure restricted
    # to boundary pairs
    for seed in range(5):
        g = gen_er(70 + 10 * seed, 0.05, seed=seed)
        p = kway_partition(g, 3 + (seed % 3), seed=seed)
        bs = find_boundary(g, p)
        if bs.union.size == 0:
            continue
        gb = build_boundary_graph(g, p, bs, _close_components(g, p))
        got = floyd_warshall_dense(distance_init(gb))
        full = floyd_warshall_dense(distance_init(g))
        want = full[np.ix_(bs.union, bs.union)]
        assert np.array_equal(got, want)


def test_boundary_graph_vertex_convention_and_cross_edges():
    g = ring_of_cliques()
    p = Partition(12, 3, np.repeat(np.arange(3), 4))
    bs = find_boundary(g, p)
    assert np.array_equal(bs.union, [0, 3, 4, 7, 8, 11])
    gb = build_boundary_graph(g, p, bs, _close_components(g, p))
    assert gb.n == 6
    # cross bridges keep their weight, intra pairs carry clique distance 1
    w = {(u, v): wt for u, v, wt in gb.edges()}
    lookup = {int(x): i for i, x in enumerate(bs.union)}
    assert w[(lookup[3], lookup[4])] == 2
    assert w[(lookup[0], lookup[3])] == 1
    assert gb.edge_count == 12


def test_boundary_graph_skips_unreachable_intra_pairs():
    # component {0,1} has no 1->0 path, so no virtual edge appears for it
    g = WeightedGraph.from_edges(3, [(0, 1, 4), (1, 2, 1), (2, 0, 1)])
    p = Partition(3, 2, np.array([0, 0, 1]))
    bs = find_boundary(g, p)
    gb = build_boundary_graph(g, p, bs, _close_components(g, p))
    pairs = {(u, v) for u, v, _ in gb.edges()}
    lookup = {int(x): i for i, x in enumerate(bs.union)}
    assert (lookup[0], lookup[1]) in pairs  # direct arc 0->1
    assert (lookup[1], lookup[0]) not in pairs


def test_boundary_graph_missing_block_raises():
    g = ring_of_cliques()
    p = Partition(12, 3, np.repeat(np.arange(3), 4))
    bs = find_boundary(g, p)
    with pytest.raises(PartitionError):
        build_boundary_graph(g, p, bs, {})


# ---------------------------------------------------------------------------
# build_hierarchy
# ---------------------------------------------------------------------------


def test_hierarchy_small_graph_is_single_trivial_level():
    g = gen_er(30, 0.1, seed=2)
    h = build_hierarchy(g, max_tile=64)
    assert h.depth == 1
    assert h.levels[0].partition.k == 1
    assert h.levels[0].boundary_ids.size == 0
    assert h.top_boundary_graph.n == 0
    assert not h.truncated


def test_hierarchy_levels_chain_and_fit_tiles():
    g = gen_clustered(12, 40, seed=5)
    h = build_hierarchy(g, max_tile=48, seed=1)
    assert h.depth >= 2
    for lv in h.levels:
        assert lv.partition.sizes().max() <= 48
        assert np.all(np.diff(lv.boundary_ids) > 0)
        assert lv.boundary_graph.n == lv.boundary_ids.size
    for i in range(h.depth - 1):
        assert h.levels[i + 1].partition.n == h.levels[i].boundary_ids.size
    if not h.truncated:
        assert h.top_boundary_graph.n <= 48


def test_hierarchy_level0_boundary_is_exact():
    g = gen_clustered(8, 30, seed=3)
    h = build_hierarchy(g, max_tile=36, seed=0)
    exact = find_boundary(g, h.levels[0].partition)
    assert np.array_equal(h.levels[0].boundary_ids, exact.union)
    for c, verts in exact.per_component.items():
        assert np.array_equal(h.levels[0].boundaries.of(c), verts)


def test_hierarchy_upper_boundary_covers_exact_boundary():
    # structural boundaries may over-approximate (no reachability filter)
    # but must never miss a vertex of the real boundary graph's boundary
    g = gen_clustered(12, 40, seed=5)
    h = build_hierarchy(g, max_tile=48, seed=1)
    assert h.depth >= 2
    lvl0 = h.levels[0]
    real_gb = build_boundary_graph(
        g, lvl0.partition, lvl0.boundaries, _close_components(g, lvl0.partition)
    )
    exact = find_boundary(real_gb, h.levels[1].partition)
    assert np.all(np.isin(exact.union, h.levels[1].boundary_ids))


def test_hierarchy_stall_truncates_gracefully():
    # a complete graph never shrinks: every vertex is boundary for any split
    g = complete_graph(200)
    h = build_hierarchy(g, max_tile=64, seed=0)
    assert h.truncated
    assert h.depth == 1
    assert h.top_boundary_graph.n == 200
    for lv in h.levels:
        assert lv.partition.sizes().max() <= 64


def test_hierarchy_stall_raises_in_strict_mode():
    g = complete_graph(200)
    with pytest.raises(HierarchyError):
        build_hierarchy(g, max_tile=64, seed=0, strict=True)


def test_hierarchy_deterministic():
    g = gen_clustered(10, 30, seed=11)
    h1 = build_hierarchy(g, max_tile=40, seed=4)
    h2 = build_hierarchy(g, max_tile=40, seed=4)
    assert h1.depth == h2.depth
    for a, b in zip(h1.levels, h2.levels):
        assert np.array_equal(a.partition.assign, b.partition.assign)
        assert np.array_equal(a.boundary_ids, b.boundary_ids)


def test_hierarchy_path_tiles_contiguously():
    # cut-edge count oracle: 4 contiguous runs on a path cut 3 edges
    tile = 100
    g = path_graph(4 * tile)
    h = build_hierarchy(g, max_tile=tile, k_fn=lambda n: 4, imbalance=0.0, seed=0)
    assert h.levels[0].partition.k == 4
    assert h.levels[0].boundary_ids.size <= 6


def test_hierarchy_er5000_structure():
    # sparse expander: boundary sets stay large, so the build must still
    # terminate with valid tile-sized components at every level
    g = gen_er(5000, 0.002, seed=0)
    h = build_hierarchy(g, max_tile=256, seed=0)
    assert h.depth >= 1
    for lv in h.levels:
        assert lv.partition.sizes().max() <= 256
    assert h.truncated or h.top_boundary_graph.n <= 256


def test_hierarchy_rejects_tiny_tile():
    g = gen_er(20, 0.2, seed=0)
    with pytest.raises(HierarchyError):
        build_hierarchy(g, max_tile=1)


def test_hierarchy_stats_shape():
    g = gen_clustered(6, 25, seed=2)
    h = build_hierarchy(g, max_tile=32, seed=0)
    st = h.stats()
    assert len(st["levels"]) == h.depth
    assert st["levels"][0]["n"] == g.n


# ---------------------------------------------------------------------------
# dump / load
# ---------------------------------------------------------------------------


def test_partition_roundtrip(tmp_path):
    g = gen_er(40, 0.1, seed=6)
    p = kway_partition(g, 5, seed=2)
    path = tmp_path / "part.tsv"
    dump_partition(p, str(path))
    q = load_partition(str(path))
    assert q.n == p.n and q.k == p.k
    assert np.array_equal(q.assign, p.assign)


def test_partition_load_rejects_malformed(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("0 1\n")
    with pytest.raises(PartitionError):
        load_partition(str(path))


def test_partition_load_rejects_gaps(tmp_path):
    path = tmp_path / "gap.tsv"
    path.write_text("# n=3 k=2\n0\t0\n2\t1\n")
    with pytest.raises(PartitionError):
        load_partition(str(path))
