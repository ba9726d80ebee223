"""Graph containers, synthetic generators, and on-disk formats.

Weighted directed graphs are the substrate for the shortest-path engine;
base-labelled DAGs ("genome graphs") are the substrate for the alignment
engine.  Everything here is deterministic given a seed: generators consume
a ``numpy.random.Generator`` seeded explicitly, and all tie-breaks are by
vertex id.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

# Saturating "unreachable" sentinel for 32-bit distance arithmetic.
INF_SENTINEL = 2**31 - 1

# Largest edge weight accepted; keeps single min-plus sums below the sentinel.
MAX_WEIGHT = INF_SENTINEL // 2

DEFAULT_W_MAX = 100

DNA_ALPHABET = b"ACGTN"

# Row block used by gen_er when sampling the adjacency matrix.  Fixed so the
# RNG stream (and therefore the graph) does not depend on available memory.
_ER_ROW_BLOCK = 512


class GraphError(ValueError):
    """Malformed graph input (bad ids, bad weights, bad structure)."""


class DuplicateEdgeError(GraphError):
    """Same (src, dst) arc given twice."""


class CycleError(GraphError):
    """A graph that must be acyclic contains a cycle."""


class AlphabetError(GraphError):
    """Base label outside ACGTN."""


class FormatError(GraphError):
    """Unparseable or out-of-subset file content."""


class ReadLengthError(GraphError):
    """Requested read length exceeds every path in the graph."""


# ---------------------------------------------------------------------------
# Weighted directed graphs
# ---------------------------------------------------------------------------


@dataclass
class WeightedGraph:
    """Directed graph with non-negative integer edge weights.

    Edges are stored as three parallel arrays (``src``, ``dst``, ``w``).
    Undirected inputs are represented by storing both arcs.  Weights are
    bounded by ``MAX_WEIGHT`` so a single saturating add cannot wrap.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        self.w = np.asarray(self.w, dtype=np.int64)
        if not (self.src.shape == self.dst.shape == self.w.shape):
            raise GraphError("edge arrays must have identical shapes")
        if self.n < 0:
            raise GraphError("vertex count must be non-negative")
        if self.src.size:
            lo = min(self.src.min(), self.dst.min())
            hi = max(self.src.max(), self.dst.max())
            if lo < 0 or hi >= self.n:
                raise GraphError(f"vertex id out of range [0, {self.n})")
            if self.w.min() < 0 or self.w.max() > MAX_WEIGHT:
                raise GraphError(f"weights must lie in [0, {MAX_WEIGHT}]")
            loops = self.src == self.dst
            if np.any(self.w[loops] > 0):
                raise GraphError("self-loop with positive weight (self distance is 0)")

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        if len(edges) == 0:
            z = np.zeros(0, dtype=np.int64)
            return cls(n, z, z.copy(), z.copy())
        arr = np.asarray(edges, dtype=np.int64)
        return cls(n, arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy())

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    def edges(self):
        """Iterate (src, dst, w) tuples in storage order."""
        for u, v, wt in zip(self.src, self.dst, self.w):
            yield int(u), int(v), int(wt)


@dataclass
class CsrGraph:
    """Compressed sparse row view of a :class:`WeightedGraph`.

    ``col`` is strictly increasing within each row (duplicates are rejected
    at build time, so the invariant is structural).
    """

    n: int
    rowptr: np.ndarray
    col: np.ndarray
    val: np.ndarray

    def to_dense(self) -> np.ndarray:
        """Dense adjacency; absent arcs (including the diagonal) read INF."""
        d = np.full((self.n, self.n), INF_SENTINEL, dtype=np.int64)
        for i in range(self.n):
            d[i, self.col[self.rowptr[i] : self.rowptr[i + 1]]] = self.val[
                self.rowptr[i] : self.rowptr[i + 1]
            ]
        return d

    def out_neighbors(self, u: int):
        s, e = self.rowptr[u], self.rowptr[u + 1]
        return self.col[s:e], self.val[s:e]


def build_csr(g: WeightedGraph) -> CsrGraph:
    """Sort arcs into CSR form; a repeated (src, dst) pair is an error."""
    order = np.lexsort((g.dst, g.src))
    src = g.src[order]
    dst = g.dst[order]
    val = g.w[order]
    if src.size > 1:
        same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
        if np.any(same):
            i = int(np.argmax(same))
            raise DuplicateEdgeError(
                f"duplicate arc ({int(src[i])}, {int(dst[i])})"
            )
    rowptr = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(rowptr, src + 1, 1)
    np.cumsum(rowptr, out=rowptr)
    return CsrGraph(g.n, rowptr, dst, val)


def graph_to_dense(g: WeightedGraph) -> np.ndarray:
    """Dense adjacency of ``g``; parallel arcs keep the minimum weight."""
    d = np.full((g.n, g.n), INF_SENTINEL, dtype=np.int64)
    np.minimum.at(d, (g.src, g.dst), g.w)
    return d


def distance_init(g: WeightedGraph) -> np.ndarray:
    """Dense distance seed: adjacency with a zero diagonal."""
    d = graph_to_dense(g)
    np.fill_diagonal(d, 0)
    return d


# ---------------------------------------------------------------------------
# Random graph generators
# ---------------------------------------------------------------------------


def gen_er(n: int, p: float, seed: int, w_max: int = DEFAULT_W_MAX) -> WeightedGraph:
    """Directed Erdos-Renyi graph: each ordered pair is an arc with prob p."""
    if n <= 0:
        raise GraphError("n must be positive")
    if not 0.0 <= p <= 1.0:
        raise GraphError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    srcs = []
    dsts = []
    for r0 in range(0, n, _ER_ROW_BLOCK):
        r1 = min(n, r0 + _ER_ROW_BLOCK)
        block = rng.random((r1 - r0, n)) < p
        rows = np.arange(r0, r1)
        block[rows - r0, rows] = False  # no self-loops
        s, d = np.nonzero(block)
        srcs.append(s + r0)
        dsts.append(d)
    src = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
    w = rng.integers(1, w_max + 1, size=src.size, dtype=np.int64)
    return WeightedGraph(n, src.astype(np.int64), dst.astype(np.int64), w)


def gen_nws(
    n: int, k: int, p: float, seed: int, w_max: int = DEFAULT_W_MAX
) -> WeightedGraph:
    """Newman-Watts small world: ring lattice plus random shortcut additions.

    Every vertex is joined to its k nearest ring neighbours (k/2 each side);
    for each lattice edge a shortcut between a uniform vertex pair is added
    with probability p.  Edges are undirected (both arcs stored, one weight).
    The lattice is never rewired, so |E| >= n*k/2 undirected pairs.
    """
    if k % 2 or k <= 0:
        raise GraphError("k must be positive and even")
    if n <= k:
        raise GraphError("n must exceed k")
    rng = np.random.default_rng(seed)
    pairs = set()
    for d in range(1, k // 2 + 1):
        for i in range(n):
            j = (i + d) % n
            pairs.add((min(i, j), max(i, j)))
    lattice_count = len(pairs)
    n_short = int(rng.binomial(lattice_count, p))
    added = 0
    while added < n_short:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in pairs:
            # collision with an existing edge: drop rather than rewire
            added += 1
            continue
        pairs.add(key)
        added += 1
    und = np.array(sorted(pairs), dtype=np.int64)
    w = rng.integers(1, w_max + 1, size=und.shape[0], dtype=np.int64)
    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    return WeightedGraph(n, src, dst, np.concatenate([w, w]))


def gen_clustered(
    clusters: int,
    cluster_size: int,
    seed: int,
    span: int = 4,
    gateways: int = 4,
    extra_inter: int = 1,
    groups: int = 1,
    w_max: int = DEFAULT_W_MAX,
) -> WeightedGraph:
    """Two-level clustered topology: locally wired clusters, sparse gateways.

    Each cluster is a ring of ``cluster_size`` vertices with chords to the
    ``span`` nearest ring positions, so all intra-cluster structure is local.
    Inter-cluster edges touch only the first ``gateways`` vertices of each
    cluster.  Clusters are arranged on a ring; with ``groups`` > 1 the
    clusters are grouped and inter-group edges only leave the first cluster
    of each group, giving a second level of locality.
    """
    if clusters <= 1 or cluster_size < 4:
        raise GraphError("need at least 2 clusters of >= 4 vertices")
    gateways = min(gateways, cluster_size)
    rng = np.random.default_rng(seed)
    n = clusters * cluster_size
    pairs = set()

    def base(c):
        return c * cluster_size

    for c in range(clusters):
        b = base(c)
        for i in range(cluster_size):
            for d in range(1, min(span, cluster_size - 1) + 1):
                j = (i + d) % cluster_size
                u, v = b + i, b + j
                pairs.add((min(u, v), max(u, v)))

    per_group = max(1, clusters // max(1, groups))

    def gateway(c):
        return base(c) + int(rng.integers(0, gateways))

    for c in range(clusters):
        # ring of clusters restricted to each group at level two
        g0 = c // per_group
        nxt = c + 1
        if nxt // per_group != g0 or nxt >= clusters:
            nxt = g0 * per_group  # close the group ring
        if nxt != c:
            pairs.add(tuple(sorted((gateway(c), gateway(nxt)))))
        for _ in range(extra_inter):
            lo = g0 * per_group
            hi = min(clusters, lo + per_group)
            other = int(rng.integers(lo, hi))
            if other != c:
                pairs.add(tuple(sorted((gateway(c), gateway(other)))))
    if groups > 1:
        # sparse ring over group leaders
        for g0 in range(groups):
            lead = g0 * per_group
            nxt = ((g0 + 1) % groups) * per_group
            if lead < clusters and nxt < clusters and lead != nxt:
                pairs.add(tuple(sorted((gateway(lead), gateway(nxt)))))

    und = np.array(sorted(pairs), dtype=np.int64)
    w = rng.integers(1, w_max + 1, size=und.shape[0], dtype=np.int64)
    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    return WeightedGraph(n, src, dst, np.concatenate([w, w]))


# ---------------------------------------------------------------------------
# Edge-list format: "src<TAB>dst<TAB>weight", '#' comments, 0-based ids.
# ---------------------------------------------------------------------------


def dump_edge_list(g: WeightedGraph, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={g.n}\n")
        for u, v, wt in zip(g.src, g.dst, g.w):
            fh.write(f"{u}\t{v}\t{wt}\n")


def load_edge_list(path: str) -> WeightedGraph:
    n_hint = -1
    src, dst, w = [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    try:
                        n_hint = int(body[2:])
                    except ValueError as exc:
                        raise FormatError(f"line {lineno}: bad n= comment") from exc
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"line {lineno}: expected src<TAB>dst<TAB>weight")
            try:
                src.append(int(parts[0]))
                dst.append(int(parts[1]))
                w.append(int(parts[2]))
            except ValueError as exc:
                raise FormatError(f"line {lineno}: non-integer field") from exc
    n = n_hint
    if n < 0:
        n = (max(max(src), max(dst)) + 1) if src else 0
    return WeightedGraph(
        n,
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        np.asarray(w, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# Base-labelled DAGs
# ---------------------------------------------------------------------------


def topo_sort(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Kahn's algorithm with a min-id heap, so the order is canonical.

    Raises :class:`CycleError` naming one edge that closes a cycle.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    indeg = np.zeros(n, dtype=np.int64)
    np.add.at(indeg, dst, 1)
    order_ = np.lexsort((dst, src))
    s_sorted = src[order_]
    d_sorted = dst[order_]
    rowptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(rowptr, s_sorted + 1, 1)
    np.cumsum(rowptr, out=rowptr)

    heap = [int(v) for v in np.nonzero(indeg == 0)[0]]
    heapq.heapify(heap)
    out = np.empty(n, dtype=np.int64)
    filled = 0
    indeg = indeg.copy()
    while heap:
        u = heapq.heappop(heap)
        out[filled] = u
        filled += 1
        for v in d_sorted[rowptr[u] : rowptr[u + 1]]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, int(v))
    if filled != n:
        stuck = indeg > 0
        # any arc between two stuck vertices lies on (or feeds) a cycle
        for u, v in zip(s_sorted, d_sorted):
            if stuck[u] and stuck[v]:
                raise CycleError(f"cycle through edge ({int(u)}, {int(v)})")
        raise CycleError("cycle detected")
    return out


@dataclass
class GenomeGraph:
    """Base-labelled DAG in topological storage.

    ``bases`` holds one ASCII byte per node (ACGTN).  Predecessor and
    successor adjacency are CSR arrays; ``topo_order`` is the canonical
    Kahn order and ``topo_pos[v]`` its inverse.
    """

    bases: np.ndarray
    pred_ptr: np.ndarray
    pred_idx: np.ndarray
    succ_ptr: np.ndarray
    succ_idx: np.ndarray
    topo_order: np.ndarray
    names: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.bases.size)

    def __post_init__(self):
        self.topo_pos = np.empty(self.n, dtype=np.int64)
        self.topo_pos[self.topo_order] = np.arange(self.n)

    def preds(self, v: int) -> np.ndarray:
        return self.pred_idx[self.pred_ptr[v] : self.pred_ptr[v + 1]]

    def succs(self, v: int) -> np.ndarray:
        return self.succ_idx[self.succ_ptr[v] : self.succ_ptr[v + 1]]

    def base(self, v: int) -> str:
        return chr(self.bases[v])


def genome_graph(bases: str, edges) -> GenomeGraph:
    """Build a :class:`GenomeGraph` from a base string and (u, v) edge pairs."""
    b = np.frombuffer(bases.encode("ascii"), dtype=np.uint8).copy()
    bad = ~np.isin(b, np.frombuffer(DNA_ALPHABET, dtype=np.uint8))
    if np.any(bad):
        raise AlphabetError(f"base {chr(b[int(np.argmax(bad))])!r} not in ACGTN")
    n = b.size
    if len(edges):
        arr = np.asarray(edges, dtype=np.int64)
        src, dst = arr[:, 0], arr[:, 1]
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise GraphError("edge endpoint out of range")
    else:
        src = np.zeros(0, dtype=np.int64)
        dst = np.zeros(0, dtype=np.int64)
    order = topo_sort(n, src, dst)

    def csr(a, b_):
        idx = np.lexsort((b_, a))
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, a[idx] + 1, 1)
        np.cumsum(ptr, out=ptr)
        return ptr, b_[idx]

    succ_ptr, succ_idx = csr(src, dst)
    pred_ptr, pred_idx = csr(dst, src)
    return GenomeGraph(b, pred_ptr, pred_idx, succ_ptr, succ_idx, order)


# ---------------------------------------------------------------------------
# GFA subset: S and L records only, '+' orientations, ACGTN sequences.
# ---------------------------------------------------------------------------


def parse_gfa(text: str) -> GenomeGraph:
    seg_seq: dict[str, str] = {}
    links: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        tag = parts[0]
        if tag == "S":
            if len(parts) < 3:
                raise FormatError(f"line {lineno}: S record needs id and sequence")
            name, seq = parts[1], parts[2]
            if name in seg_seq:
                raise FormatError(f"line {lineno}: duplicate segment {name!r}")
            if not seq:
                raise FormatError(f"line {lineno}: empty sequence")
            seg_seq[name] = seq.upper()
        elif tag == "L":
            if len(parts) < 5:
                raise FormatError(f"line {lineno}: L record needs from,+,to,+")
            frm, o1, to, o2 = parts[1], parts[2], parts[3], parts[4]
            if o1 != "+" or o2 != "+":
                raise FormatError(
                    f"line {lineno}: only '+' orientations are supported"
                )
            links.append((frm, to))
        else:
            raise FormatError(f"line {lineno}: record type {tag!r} not supported")

    # expand multi-character segments into per-base node chains
    bases = []
    first: dict[str, int] = {}
    last: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    for name, seq in seg_seq.items():
        first[name] = len(bases)
        for i, ch in enumerate(seq):
            if i > 0:
                edges.append((len(bases) - 1, len(bases)))
            bases.append(ch)
        last[name] = len(bases) - 1
    for frm, to in links:
        if frm not in seg_seq or to not in seg_seq:
            missing = frm if frm not in seg_seq else to
            raise FormatError(f"link references unknown segment {missing!r}")
        edges.append((last[frm], first[to]))
    g = genome_graph("".join(bases), edges)
    g.names = list(seg_seq)
    return g


def load_genome_graph(path: str) -> GenomeGraph:
    with open(path) as fh:
        return parse_gfa(fh.read())


def gen_genome(
    bases: int, bubble_rate: float, seed: int, segment_span: tuple[int, int] = (20, 200)
) -> tuple[str, str]:
    """Synthesise a GFA-subset pangenome-like graph and its linear reference.

    Returns ``(gfa_text, reference_sequence)``.  The backbone is a random
    sequence of the requested length, cut into multi-character segments;
    at each bubble site the reference base and one alternative base form a
    two-branch bubble.  The reference sequence spells the backbone path.
    """
    if bases < 4:
        raise GraphError("need at least 4 bases")
    rng = np.random.default_rng(seed)
    alpha = "ACGT"
    ref = "".join(alpha[i] for i in rng.integers(0, 4, size=bases))

    # choose non-adjacent interior bubble positions
    sites = []
    pos = 1
    while pos < bases - 1:
        if rng.random() < bubble_rate:
            sites.append(pos)
            pos += 2  # keep bubbles separated by at least one backbone base
        else:
            pos += 1

    lines = []
    seg_id = 0

    def new_seg(seq: str) -> str:
        nonlocal seg_id
        seg_id += 1
        name = f"s{seg_id}"
        lines.append(f"S\t{name}\t{seq}")
        return name

    # the graph alternates serial backbone pieces and two-branch bubbles
    elements: list[tuple[str, list[str]]] = []
    cursor = 0
    lo, hi = segment_span
    for site in sites + [bases]:
        chunk = ref[cursor:site]
        names = []
        while chunk:
            cut = int(rng.integers(lo, hi + 1))
            names.append(new_seg(chunk[:cut]))
            chunk = chunk[cut:]
        if names:
            elements.append(("serial", names))
        if site < bases:
            ref_base = ref[site]
            alt = alpha[(alpha.index(ref_base) + 1 + int(rng.integers(0, 3))) % 4]
            elements.append(("bubble", [new_seg(ref_base), new_seg(alt)]))
            cursor = site + 1

    links: list[tuple[str, str]] = []
    prev_tails: list[str] = []
    for kind, names in elements:
        if kind == "serial":
            for a, b in zip(names, names[1:]):
                links.append((a, b))
            heads, tails = [names[0]], [names[-1]]
        else:
            heads, tails = names, names
        for t in prev_tails:
            for h in heads:
                links.append((t, h))
        prev_tails = tails
    for a, b in links:
        lines.append(f"L\t{a}\t+\t{b}\t+\t0M")
    return "\n".join(lines) + "\n", ref


# ---------------------------------------------------------------------------
# Reads
# ---------------------------------------------------------------------------

SHORT_READ_THRESHOLD = 300


@dataclass
class ReadBatch:
    """A set of reads of one length class ("short" <= threshold < "long")."""

    reads: list  # list of (read_id, sequence)
    length_class: str

    def __post_init__(self):
        if self.length_class not in ("short", "long"):
            raise GraphError("length_class must be 'short' or 'long'")
        for rid, seq in self.reads:
            if self.length_class == "short" and len(seq) > SHORT_READ_THRESHOLD:
                raise GraphError(f"read {rid} too long for a short batch")


def split_by_length(reads, threshold: int = SHORT_READ_THRESHOLD):
    """Partition reads into (short_batch, long_batch); either may be empty."""
    short = [(r, s) for r, s in reads if len(s) <= threshold]
    long_ = [(r, s) for r, s in reads if len(s) > threshold]
    return (
        ReadBatch(short, "short"),
        ReadBatch(long_, "long"),
    )


def gen_reads(
    g: GenomeGraph,
    count: int,
    length: int,
    sub_rate: float,
    seed: int,
) -> list:
    """Sample reads as random walks, then apply base substitutions.

    Start nodes are drawn uniformly among nodes from which a path of the
    requested length exists; each step picks uniformly among successors that
    still admit a long-enough suffix.  Substitutions replace a base with a
    uniformly chosen different base at rate ``sub_rate``.
    """
    if length < 1:
        raise GraphError("read length must be positive")
    rng = np.random.default_rng(seed)
    # longest path beginning at each node, by reverse topological sweep
    lp = np.ones(g.n, dtype=np.int64)
    for v in g.topo_order[::-1]:
        s = g.succs(v)
        if s.size:
            lp[v] = 1 + lp[s].max()
    starts = np.nonzero(lp >= length)[0]
    if starts.size == 0:
        raise ReadLengthError(
            f"no path of length {length} (longest is {int(lp.max())})"
        )
    alpha = "ACGT"
    reads = []
    for r in range(count):
        v = int(starts[rng.integers(0, starts.size)])
        seq = [g.base(v)]
        remaining = length - 1
        while remaining:
            succ = g.succs(v)
            ok = succ[lp[succ] >= remaining]
            v = int(ok[rng.integers(0, ok.size)])
            seq.append(g.base(v))
            remaining -= 1
        if sub_rate > 0.0:
            for i in range(length):
                if rng.random() < sub_rate:
                    cur = seq[i]
                    if cur in alpha:
                        seq[i] = alpha[(alpha.index(cur) + 1 + int(rng.integers(0, 3))) % 4]
        reads.append((f"r{r}", "".join(seq)))
    return reads


# ---------------------------------------------------------------------------
# FASTA
# ---------------------------------------------------------------------------


def dump_fasta(records, path: str, width: int = 60) -> None:
    with open(path, "w") as fh:
        for name, seq in records:
            fh.write(f">{name}\n")
            for i in range(0, len(seq), width):
                fh.write(seq[i : i + width] + "\n")


def load_fasta(path: str) -> list:
    records = []
    name = None
    chunks: list[str] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                if name is not None:
                    records.append((name, "".join(chunks)))
                name = line[1:].split()[0]
                chunks = []
            else:
                if name is None:
                    raise FormatError("sequence data before any FASTA header")
                chunks.append(line.upper())
    if name is not None:
        records.append((name, "".join(chunks)))
    return records
