"""Graph partitioning and the multilevel boundary hierarchy.

The hierarchy splits a graph into tile-sized components, extracts the
vertices with cross-component edges, and condenses them into a boundary
graph: cross edges survive verbatim, and each component contributes
virtual edges among its own boundary vertices (weighted, in the exact
engine, by closed intra-component distances).  Recursing on the boundary
graph yields levels until the boundary graph fits a tile or stops
shrinking.

Hierarchy construction here is purely structural: virtual connectivity is
tracked as "groups" (a component's boundary set is pairwise potentially
connected) without computing any shortest paths.  Structural boundary
sets therefore over-approximate the exact engine's boundary graphs (no
reachability filtering), which is sound: extra boundary vertices add
work, never wrong distances.  The shortest-path engine rebuilds each
level's boundary graph with exact weights via :func:`build_boundary_graph`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphError, WeightedGraph
from .minplus import DistanceBlock

DEFAULT_IMBALANCE = 0.1
DEFAULT_REFINE_PASSES = 2

# groups up to this size materialize as full cliques in structural boundary
# graphs; larger groups use bidirectional rings (connectivity surrogate)
_CLIQUE_CAP = 64


class PartitionError(GraphError):
    """Bad partition request (k out of range, malformed assignment)."""


class HierarchyError(GraphError):
    """Boundary graph refused to shrink in strict mode."""


@dataclass
class Partition:
    """Assignment of ``n`` vertices to ``k`` components."""

    n: int
    k: int
    assign: np.ndarray

    def __post_init__(self):
        self.assign = np.asarray(self.assign, dtype=np.int64)
        if self.assign.shape != (self.n,):
            raise PartitionError("assignment length must equal n")
        if self.n and (self.assign.min() < 0 or self.assign.max() >= self.k):
            raise PartitionError("component id out of range")

    def component(self, c: int) -> np.ndarray:
        return np.nonzero(self.assign == c)[0]

    def components(self) -> list:
        order = np.argsort(self.assign, kind="stable")
        splits = np.searchsorted(self.assign[order], np.arange(1, self.k))
        return [np.sort(part) for part in np.split(order, splits)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assign, minlength=self.k)


@dataclass
class BoundarySet:
    """Per-component sorted boundary vertex lists plus their sorted union."""

    per_component: dict
    union: np.ndarray

    def of(self, c: int) -> np.ndarray:
        return self.per_component.get(c, np.zeros(0, dtype=np.int64))


def _undirected_csr(g: WeightedGraph):
    us = np.concatenate([g.src, g.dst])
    ud = np.concatenate([g.dst, g.src])
    order = np.argsort(us, kind="stable")
    ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(ptr, us + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, ud[order]


def _size_cap(n: int, k: int, imbalance: float) -> int:
    base = math.ceil(n / k)
    return max(base, int(base * (1.0 + imbalance)))


def kway_partition(
    g: WeightedGraph,
    k: int,
    seed: int = 0,
    imbalance: float = DEFAULT_IMBALANCE,
    refine_passes: int = DEFAULT_REFINE_PASSES,
) -> Partition:
    """Balanced k-way partition by BFS region growing plus move refinement.

    The first region grows breadth-first from a minimum-degree vertex (a
    peripheral start; the seeded shuffle breaks ties), and each later region
    seeds from the previous regions' frontier spill, so regions stay
    adjacent and a path graph tiles into contiguous runs.  Growth stops at
    a balanced target; leftovers join the smallest adjacent region.
    Refinement passes move boundary vertices when that strictly reduces the
    number of cut edges without breaking the ``ceil(n/k)*(1+imbalance)``
    size cap.  Deterministic for a fixed seed.
    """
    n = g.n
    if not 1 <= k <= max(n, 1):
        raise PartitionError(f"k={k} out of range [1, {n}]")
    if k == 1:
        return Partition(n, 1, np.zeros(n, dtype=np.int64))
    if k == n:
        return Partition(n, k, np.arange(n, dtype=np.int64))

    ptr, adj = _undirected_csr(g)
    rng = np.random.default_rng(seed)
    assign = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros(k, dtype=np.int64)
    base, rem = divmod(n, k)
    targets = np.full(k, base, dtype=np.int64)
    targets[:rem] += 1
    cap = _size_cap(n, k, imbalance)

    perm = rng.permutation(n)
    rank = np.empty(n, dtype=np.int64)
    rank[perm] = np.arange(n)
    # restart key: degree first, shuffled rank second
    seed_key = np.diff(ptr) * np.int64(n) + rank
    spill: deque = deque()
    for c in range(k):
        seed_v = -1
        while spill:
            cand = spill.popleft()
            if assign[cand] < 0:
                seed_v = cand
                break
        if seed_v < 0:
            key = np.where(assign < 0, seed_key, np.iinfo(np.int64).max)
            seed_v = int(np.argmin(key))
            if assign[seed_v] >= 0:
                break
        dq = deque([seed_v])
        while dq and sizes[c] < targets[c]:
            v = dq.popleft()
            if assign[v] >= 0:
                continue
            assign[v] = c
            sizes[c] += 1
            for u in adj[ptr[v] : ptr[v + 1]]:
                if assign[u] < 0:
                    dq.append(int(u))
        spill.extend(int(v) for v in dq if assign[v] < 0)

    # attach leftovers: prefer the smallest adjacent region with room,
    # fall back to the globally smallest region with room
    pending = deque(int(v) for v in range(n) if assign[v] < 0)
    stalled = 0
    while pending:
        v = pending.popleft()
        best = -1
        for u in adj[ptr[v] : ptr[v + 1]]:
            c = assign[u]
            if c >= 0 and sizes[c] < cap and (best < 0 or sizes[c] < sizes[best]):
                best = int(c)
        if best < 0 and stalled >= len(pending) + 1:
            room = np.nonzero(sizes < cap)[0]
            best = int(room[np.argmin(sizes[room])])
        if best < 0:
            pending.append(v)
            stalled += 1
            continue
        assign[v] = best
        sizes[best] += 1
        stalled = 0

    for _ in range(max(0, refine_passes)):
        moved = False
        cross = assign[g.src] != assign[g.dst]
        border = np.unique(np.concatenate([g.src[cross], g.dst[cross]]))
        for v in border:
            v = int(v)
            c = int(assign[v])
            if sizes[c] <= 1:
                continue
            counts: dict[int, int] = {}
            for u in adj[ptr[v] : ptr[v + 1]]:
                counts[int(assign[u])] = counts.get(int(assign[u]), 0) + 1
            own = counts.get(c, 0)
            best_c, best_gain = -1, 0
            for cc in sorted(counts):
                if cc == c or sizes[cc] + 1 > cap:
                    continue
                gain = counts[cc] - own
                if gain > best_gain:
                    best_c, best_gain = cc, gain
            if best_c >= 0:
                assign[v] = best_c
                sizes[c] -= 1
                sizes[best_c] += 1
                moved = True
        if not moved:
            break

    return Partition(n, k, assign)


def find_boundary(g: WeightedGraph, p: Partition) -> BoundarySet:
    """Vertices incident to at least one cross-component edge, per component."""
    cross = p.assign[g.src] != p.assign[g.dst]
    verts = np.unique(np.concatenate([g.src[cross], g.dst[cross]]))
    per = {}
    for c in np.unique(p.assign[verts]) if verts.size else []:
        per[int(c)] = verts[p.assign[verts] == c]
    return BoundarySet(per, verts)


def _dedupe_min(n: int, src, dst, w) -> tuple:
    """Collapse parallel arcs keeping the minimum weight."""
    if len(src) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy()
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    key = src * n + dst
    order = np.lexsort((w, key))
    key, src, dst, w = key[order], src[order], dst[order], w[order]
    first = np.ones(key.size, dtype=bool)
    first[1:] = key[1:] != key[:-1]
    return src[first], dst[first], w[first]


def build_boundary_graph(
    g: WeightedGraph,
    p: Partition,
    boundaries: BoundarySet,
    intra: dict,
) -> WeightedGraph:
    """Exact boundary graph: cross edges plus closed intra-distance edges.

    Vertex ``i`` of the result is ``boundaries.union[i]`` (sorted ascending);
    this index convention is shared with the shortest-path engine.  For each
    component ``c``, ``intra[c]`` must be the Floyd-Warshall-closed
    :class:`DistanceBlock` of the component's induced subgraph; every
    ordered boundary pair with a finite closed distance becomes a virtual
    edge.  Cross edges are copied from ``g``.  If a pair acquires both, the
    minimum weight is kept.

    Shortest distances between boundary vertices are preserved exactly:
    any path decomposes into intra-component segments between boundary
    vertices (covered by virtual edges) and cross edges.
    """
    union = boundaries.union
    lookup = np.full(g.n, -1, dtype=np.int64)
    lookup[union] = np.arange(union.size)

    cross = p.assign[g.src] != p.assign[g.dst]
    src_parts = [lookup[g.src[cross]]]
    dst_parts = [lookup[g.dst[cross]]]
    w_parts = [g.w[cross]]
    if src_parts[0].size and (src_parts[0].min() < 0 or dst_parts[0].min() < 0):
        raise PartitionError("cross edge endpoint missing from boundary set")

    for c, b in boundaries.per_component.items():
        if b.size < 2:
            continue
        if c not in intra:
            raise PartitionError(f"missing intra block for component {c}")
        blk = intra[c]
        ix = blk.local(b)
        sub = blk.data[np.ix_(ix, ix)]
        ii, jj = np.nonzero((sub < np.int64(2**31 - 1)) & ~np.eye(b.size, dtype=bool))
        src_parts.append(lookup[b[ii]])
        dst_parts.append(lookup[b[jj]])
        w_parts.append(sub[ii, jj])

    src, dst, w = _dedupe_min(
        union.size,
        np.concatenate(src_parts),
        np.concatenate(dst_parts),
        np.concatenate(w_parts),
    )
    return WeightedGraph(union.size, src, dst, w)


# ---------------------------------------------------------------------------
# Multilevel hierarchy
# ---------------------------------------------------------------------------


@dataclass
class HierarchyLevel:
    """One level: a partition of this level's graph and its boundary.

    ``boundary_ids`` maps boundary-graph vertex index to this level's vertex
    id (sorted ascending).  ``groups`` lists, for the next level, the sets of
    next-level vertices that originate from one component's boundary (their
    pairwise virtual connectivity), already relabelled to next-level indices.
    ``boundary_graph`` is the structural surrogate used for partitioning the
    next level; the exact engine rebuilds real weights.
    """

    partition: Partition
    boundaries: BoundarySet
    boundary_graph: WeightedGraph
    boundary_ids: np.ndarray
    groups: list = field(default_factory=list)


@dataclass
class PartitionHierarchy:
    levels: list
    max_tile: int
    truncated: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def top_boundary_graph(self) -> WeightedGraph:
        return self.levels[-1].boundary_graph

    def stats(self) -> dict:
        out = []
        for lv in self.levels:
            sizes = lv.partition.sizes()
            out.append(
                {
                    "n": lv.partition.n,
                    "k": lv.partition.k,
                    "max_component": int(sizes.max()) if sizes.size else 0,
                    "boundary": int(lv.boundary_ids.size),
                }
            )
        return {"levels": out, "truncated": self.truncated}


def default_branching(max_tile: int):
    """Default component count rule: twice the minimum tile covering."""

    def k_fn(n: int) -> int:
        return max(1, math.ceil(n / max_tile) * 2)

    return k_fn


def _min_feasible_k(n: int, max_tile: int, imbalance: float) -> int:
    k = max(1, math.ceil(n / max_tile))
    while _size_cap(n, k, imbalance) > max_tile and k < n:
        k += 1
    return k


def _group_boundary_mask(n, cross_src, cross_dst, groups, assign) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if cross_src.size:
        cross = assign[cross_src] != assign[cross_dst]
        mask[cross_src[cross]] = True
        mask[cross_dst[cross]] = True
    for grp in groups:
        if grp.size >= 2:
            comps = assign[grp]
            if comps.min() != comps.max():
                # the group spans >= 2 components, so every member has a
                # potential virtual edge leaving its own component
                mask[grp] = True
    return mask


def _structural_graph(n, cross_src, cross_dst, cross_w, groups) -> WeightedGraph:
    """Connectivity surrogate: cross arcs plus clique/ring edges per group."""
    srcs = [cross_src]
    dsts = [cross_dst]
    ws = [cross_w]
    for grp in groups:
        m = grp.size
        if m < 2:
            continue
        if m <= _CLIQUE_CAP:
            ii, jj = np.nonzero(~np.eye(m, dtype=bool))
            srcs.append(grp[ii])
            dsts.append(grp[jj])
            ws.append(np.ones(ii.size, dtype=np.int64))
        else:
            nxt = np.roll(grp, -1)
            srcs.extend([grp, nxt])
            dsts.extend([nxt, grp])
            ws.extend([np.ones(m, dtype=np.int64)] * 2)
    src, dst, w = _dedupe_min(
        n, np.concatenate(srcs), np.concatenate(dsts), np.concatenate(ws)
    )
    return WeightedGraph(n, src, dst, w)


def build_hierarchy(
    g: WeightedGraph,
    max_tile: int,
    k_fn=None,
    seed: int = 0,
    imbalance: float = DEFAULT_IMBALANCE,
    strict: bool = False,
) -> PartitionHierarchy:
    """Build the level structure for recursive tile-sized closure.

    Levels are ordered base to top.  Recursion continues while the boundary
    graph both exceeds ``max_tile`` and strictly shrinks; when shrinking
    stalls, the component count is halved once as a fallback, and if the
    boundary still does not shrink the hierarchy stops there (``truncated``
    set, the oversized top boundary graph is closed exactly in software by
    the engine).  With ``strict=True`` a stall raises :class:`HierarchyError`
    instead.  Every component at every level fits ``max_tile``.
    """
    if max_tile < 2:
        raise HierarchyError("max_tile must be at least 2")
    if k_fn is None:
        k_fn = default_branching(max_tile)

    levels: list[HierarchyLevel] = []
    truncated = False
    # current level's graph, as cross arcs + virtual groups
    n = g.n
    cross_src, cross_dst, cross_w = g.src, g.dst, g.w
    groups: list[np.ndarray] = []
    level = 0
    while True:
        if n <= max_tile:
            part = Partition(n, 1, np.zeros(n, dtype=np.int64))
            empty = np.zeros(0, dtype=np.int64)
            bset = BoundarySet({}, empty)
            gb = WeightedGraph.from_edges(0, [])
            levels.append(HierarchyLevel(part, bset, gb, empty, []))
            break

        struct = _structural_graph(n, cross_src, cross_dst, cross_w, groups)
        k_lo = _min_feasible_k(n, max_tile, imbalance)
        k = min(n, max(k_fn(n), k_lo))
        part = kway_partition(struct, k, seed=seed + level, imbalance=imbalance)
        mask = _group_boundary_mask(n, cross_src, cross_dst, groups, part.assign)
        boundary = int(mask.sum())
        if boundary >= n and k > k_lo:
            # fallback: fewer, larger components cut fewer edges
            k = max(k_lo, k // 2)
            part = kway_partition(struct, k, seed=seed + level, imbalance=imbalance)
            mask = _group_boundary_mask(n, cross_src, cross_dst, groups, part.assign)
            boundary = int(mask.sum())

        union = np.nonzero(mask)[0].astype(np.int64)
        per = {}
        for c in np.unique(part.assign[union]) if union.size else []:
            per[int(c)] = union[part.assign[union] == c]
        bset = BoundarySet(per, union)

        lookup = np.full(n, -1, dtype=np.int64)
        lookup[union] = np.arange(union.size)
        keep = (
            (part.assign[cross_src] != part.assign[cross_dst])
            if cross_src.size
            else np.zeros(0, dtype=bool)
        )
        nxt_src = lookup[cross_src[keep]]
        nxt_dst = lookup[cross_dst[keep]]
        nxt_w = cross_w[keep]
        nxt_groups = [lookup[b] for b in per.values() if b.size >= 2]
        # a group split across components keeps live virtual pairs between
        # those components (they are real edges of the next boundary graph),
        # so it survives as a group; every member is boundary by the split
        # rule, hence present in the next vertex set
        for grp in groups:
            if grp.size >= 2:
                comps = part.assign[grp]
                if comps.min() != comps.max():
                    nxt_groups.append(lookup[grp])

        gb = _structural_graph(union.size, nxt_src, nxt_dst, nxt_w, nxt_groups)
        levels.append(
            HierarchyLevel(part, bset, gb, union, [grp.copy() for grp in nxt_groups])
        )

        if union.size == 0 or union.size <= max_tile:
            break
        if union.size >= n:
            if strict:
                raise HierarchyError(
                    f"boundary graph stopped shrinking at level {level} "
                    f"({union.size} vertices)"
                )
            truncated = True
            break
        n = union.size
        cross_src, cross_dst, cross_w = nxt_src, nxt_dst, nxt_w
        groups = nxt_groups
        level += 1

    return PartitionHierarchy(levels, max_tile, truncated)


# ---------------------------------------------------------------------------
# Partition dump format: "vertex<TAB>component", '#' comments.
# ---------------------------------------------------------------------------


def dump_partition(p: Partition, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={p.n} k={p.k}\n")
        for v in range(p.n):
            fh.write(f"{v}\t{p.assign[v]}\n")


def load_partition(path: str) -> Partition:
    n_hint = k_hint = -1
    pairs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n="):
                        n_hint = int(tok[2:])
                    elif tok.startswith("k="):
                        k_hint = int(tok[2:])
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise PartitionError(f"line {lineno}: expected vertex<TAB>component")
            pairs[int(parts[0])] = int(parts[1])
    n = n_hint if n_hint >= 0 else (max(pairs) + 1 if pairs else 0)
    assign = np.full(n, -1, dtype=np.int64)
    for v, c in pairs.items():
        assign[v] = c
    if np.any(assign < 0):
        raise PartitionError("missing vertex assignment")
    k = k_hint if k_hint >= 0 else int(assign.max()) + 1
    return Partition(n, k, assign)
