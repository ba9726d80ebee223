"""Multilevel partitioning: how the boundary shrinks level by level and why
the severed boundary graph is safe to recurse on."""

import numpy as np

from graphdp import (
    build_boundary_graph,
    build_hierarchy,
    distance_init,
    find_boundary,
    floyd_warshall_dense,
    gen_clustered,
    kway_partition,
)
from graphdp.minplus import DistanceBlock

g = gen_clustered(24, 30, seed=2, groups=4)
print(f"clustered graph: n={g.n} arcs={g.edge_count}")

hier = build_hierarchy(g, max_tile=64, seed=0)
print(f"hierarchy: depth={hier.depth} truncated={hier.truncated}")
for li, lv in enumerate(hier.levels):
    sizes = [lv.partition.component(c).size for c in range(lv.partition.k)]
    print(f"  level {li}: k={lv.partition.k} max_comp={max(sizes)} "
          f"boundary={lv.boundary_ids.size}")

# one level by hand: cut, close components, rebuild the boundary graph
p = kway_partition(g, 6, seed=0)
bs = find_boundary(g, p)
d0 = distance_init(g)
intra = {}
for c in range(p.k):
    ids = p.component(c)
    intra[c] = DistanceBlock(floyd_warshall_dense(d0[np.ix_(ids, ids)]), ids)
gb = build_boundary_graph(g, p, bs, intra)
print(f"manual cut: k=6 boundary={bs.union.size} boundary_arcs={gb.edge_count}")

# distances between boundary vertices survive the reduction exactly
got = floyd_warshall_dense(distance_init(gb))
want = floyd_warshall_dense(d0)[np.ix_(bs.union, bs.union)]
assert np.array_equal(got, want)
print("boundary-to-boundary distances are preserved exactly")
