"""Windowed bit-parallel sequence-to-graph exact-prefix matching.

A query of length m is processed in k = ceil(m/W) windows of W bits.  Each
window sweeps the graph once in topological order; a node's state word S[v]
holds, at bit j, whether the query prefix of global length (i-1)*W + j + 1
has an exact-match path ending at v.  Window-internal dependencies resolve
in one sweep because predecessors precede their successors in topo order;
prefixes crossing a window boundary continue through a one-bit carry (the
predecessor's previous-window MSB).

The per-position boolean recurrence (align_reference) is the semantic
oracle: the windowed kernel must reproduce its scores exactly for every
window width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import (
    DNA_ALPHABET,
    AlphabetError,
    GenomeGraph,
    GraphError,
    ReadBatch,
)

DEFAULT_W = 128
PRED_CARRY = "pred"
SELF_CARRY = "self"

# traversal-tile shape shared with the cost model defaults
PE_PER_PU = 64
SHORT_GROUP_COUNT = 16
TBM_BYTES = 4096

_ACGT = tuple(DNA_ALPHABET[:4])


class AlignmentError(GraphError):
    """Bad alignment request (empty query, width misuse, config mismatch)."""


class TraceError(AlignmentError):
    """Traceback asked for state that was never recorded (or evicted)."""


@dataclass
class MaskTable:
    """Per-character match masks for one query window.

    Bit j of ``masks[c]`` is set iff the window segment has character c at
    offset j.  'N' never matches, so it owns no bits and matches none.
    """

    W: int
    masks: dict

    def mask(self, code: int) -> int:
        return self.masks.get(code, 0)


def precompute_masks(segment: str, W: int) -> MaskTable:
    if len(segment) > W:
        raise AlignmentError(f"segment of {len(segment)} chars exceeds window {W}")
    masks = {c: 0 for c in _ACGT}
    for j, ch in enumerate(segment.encode("ascii")):
        if ch in masks:
            masks[ch] |= 1 << j
        elif ch != DNA_ALPHABET[4]:  # 'N' stays maskless
            raise AlphabetError(f"query char {chr(ch)!r} not in ACGTN")
    return MaskTable(W, masks)


@dataclass
class AlignTrace:
    """Per-window state snapshots for traceback replay.

    Mirrors a circular log with ``capacity_windows`` slots per node
    (``tbm_bytes`` / (W/8) entries); older windows are evicted first, and a
    replay that reaches an evicted window fails.
    """

    W: int
    capacity_windows: int
    logs: dict = field(default_factory=dict)

    def record(self, window: int, states: list) -> None:
        self.logs[window] = states
        if len(self.logs) > self.capacity_windows:
            del self.logs[min(self.logs)]


@dataclass
class AlignResult:
    score_max: int
    end_nodes: np.ndarray
    windows: int
    self_updates: int
    hop_updates: int
    trace: AlignTrace | None = None


def classify_self_hop(g: GenomeGraph) -> np.ndarray:
    """True where a node's sole predecessor immediately precedes it in topo
    order (state forwards through the PE's own feedback port); False means
    the update reads other nodes' states (a hop through shared memory)."""
    mask = np.zeros(g.n, dtype=bool)
    counts = np.diff(g.pred_ptr)
    single = np.nonzero(counts == 1)[0]
    if single.size:
        pred = g.pred_idx[g.pred_ptr[single]]
        mask[single] = g.topo_pos[pred] == g.topo_pos[single] - 1
    return mask


def align_windowed(
    g: GenomeGraph,
    q: str,
    W: int = DEFAULT_W,
    carry_mode: str = PRED_CARRY,
    trace: bool = False,
    tbm_bytes: int = TBM_BYTES,
) -> AlignResult:
    """Score the longest exactly-matching query prefix over all graph paths.

    ``carry_mode`` selects the inter-window carry source: ``"pred"`` takes
    the OR of predecessor carries (the mode under which oracle equivalence
    holds), ``"self"`` takes the node's own previous MSB (kept for fidelity
    experiments; underestimates across window boundaries on chains).
    Matches may start at any node: window 1 shifts in a constant 1.
    """
    if not q:
        raise AlignmentError("empty query")
    if W < 1:
        raise AlignmentError("window width must be positive")
    if carry_mode not in (PRED_CARRY, SELF_CARRY):
        raise AlignmentError(f"unknown carry mode {carry_mode!r}")

    n = g.n
    order = g.topo_order.tolist()
    pred_ptr = g.pred_ptr.tolist()
    pred_idx = g.pred_idx.tolist()
    bases = g.bases.tolist()
    k = math.ceil(len(q) / W)
    wmask = (1 << W) - 1
    topbit = 1 << (W - 1)

    self_nodes = int(classify_self_hop(g).sum())
    log = AlignTrace(W, max(1, tbm_bytes // max(1, W // 8))) if trace else None

    S = [0] * n
    C = [0] * n
    best = 0
    ends: set[int] = set()
    processed = 0
    for i in range(1, k + 1):
        mt = precompute_masks(q[(i - 1) * W : i * W], W)
        masks = mt.masks
        first = i == 1
        use_pred = carry_mode == PRED_CARRY
        for v in order:
            lo, hi = pred_ptr[v], pred_ptr[v + 1]
            d_in = 0
            c_in = 1 if first else (0 if use_pred else C[v])
            for t in range(lo, hi):
                u = pred_idx[t]
                d_in |= S[u]
                if use_pred and not first:
                    c_in |= C[u]
            S[v] = ((d_in << 1) | c_in) & masks.get(bases[v], 0) & wmask
        for v in range(n):
            C[v] = 1 if S[v] & topbit else 0
        processed = i
        if log is not None:
            log.record(i, list(S))
        base_len = (i - 1) * W
        for v in range(n):
            s = S[v]
            if s:
                cand = base_len + s.bit_length()
                if cand > best:
                    best = cand
                    ends = {v}
                elif cand == best:
                    ends.add(v)
        if not any(S) and not any(C):
            break  # zero state is absorbing: later windows stay zero

    return AlignResult(
        score_max=best,
        end_nodes=np.asarray(sorted(ends), dtype=np.int64),
        windows=processed,
        self_updates=self_nodes * processed,
        hop_updates=(n - self_nodes) * processed,
        trace=log,
    )


def align_reference(g: GenomeGraph, q: str) -> AlignResult:
    """Plain per-position boolean DP, the semantic oracle.

    match[v][j] = (base(v) == q[j]) and (j == 0 or some predecessor matched
    prefix j).  No bit packing, no windows, no carries.
    """
    if not q:
        raise AlignmentError("empty query")
    qb = np.frombuffer(q.encode("ascii"), dtype=np.uint8)
    bad = ~np.isin(qb, np.frombuffer(DNA_ALPHABET, dtype=np.uint8))
    if np.any(bad):
        raise AlphabetError(f"query char {chr(qb[int(np.argmax(bad))])!r} not in ACGTN")

    n = g.n
    # edge arrays for vectorized predecessor-OR
    dst = np.repeat(np.arange(n), np.diff(g.pred_ptr))
    src = g.pred_idx
    n_code = DNA_ALPHABET[4]
    best = 0
    ends = np.zeros(n, dtype=bool)
    prev = np.zeros(n, dtype=bool)
    for j, code in enumerate(qb):
        col = g.bases == code
        if code == n_code:
            col[:] = False
        if j > 0:
            reach = np.zeros(n, dtype=bool)
            if src.size:
                np.logical_or.at(reach, dst, prev[src])
            col &= reach
        if col.any():
            best = j + 1
            ends = col.copy()
        prev = col
        if not col.any():
            break
    end_nodes = (
        np.nonzero(ends)[0].astype(np.int64) if best else np.zeros(0, dtype=np.int64)
    )
    return AlignResult(best, end_nodes, 0, 0, 0, None)


# ---------------------------------------------------------------------------
# Batch execution under the two mapping modes
# ---------------------------------------------------------------------------

MODE_SHORT = "short-parallel"
MODE_LONG = "long-pipeline"


@dataclass
class BatchConfig:
    pe_per_pu: int = PE_PER_PU
    short_groups: int = SHORT_GROUP_COUNT

    @property
    def group_size(self) -> int:
        return self.pe_per_pu // self.short_groups


@dataclass
class BatchTrace:
    """Mapping record for the cost model; carries no score information."""

    mode: str
    W: int
    nodes: int
    groups: int
    group_size: int
    rounds: int
    assignments: list
    window_passes: list
    read_lengths: list
    self_updates: int
    hop_updates: int
    graph: GenomeGraph | None = None

    @property
    def reads(self) -> int:
        return len(self.assignments)


def batch_align(
    g: GenomeGraph,
    batch: ReadBatch,
    mode: str | None = None,
    W: int = DEFAULT_W,
    carry_mode: str = PRED_CARRY,
    trace: bool = False,
    config: BatchConfig | None = None,
) -> tuple:
    """Align every read; scores are mode-independent by construction.

    Short mode fans reads out round-robin over independent PE groups; long
    mode streams them through one deep pipeline.  Both produce identical
    AlignResults (ordered by read id) and differ only in the BatchTrace.
    """
    config = config or BatchConfig()
    if config.pe_per_pu % config.short_groups:
        raise AlignmentError("pe_per_pu must divide into short-mode groups")
    if mode is None:
        mode = MODE_SHORT if batch.length_class == "short" else MODE_LONG
    if mode not in (MODE_SHORT, MODE_LONG):
        raise AlignmentError(f"unknown mapping mode {mode!r}")

    reads = sorted(batch.reads, key=lambda rs: rs[0])
    results = [
        align_windowed(g, seq, W=W, carry_mode=carry_mode, trace=trace)
        for _, seq in reads
    ]

    assignments = []
    if mode == MODE_SHORT:
        groups = config.short_groups
        gsize = config.group_size
        for j, (rid, _) in enumerate(reads):
            assignments.append((rid, j % groups, (j // groups) % gsize))
        rounds = math.ceil(len(reads) / config.pe_per_pu) if reads else 0
    else:
        groups = 1
        gsize = config.pe_per_pu
        for j, (rid, _) in enumerate(reads):
            assignments.append((rid, 0, j % config.pe_per_pu))
        rounds = math.ceil(len(reads) / config.pe_per_pu) if reads else 0

    bt = BatchTrace(
        mode=mode,
        W=W,
        nodes=g.n,
        groups=groups,
        group_size=gsize,
        rounds=rounds,
        assignments=assignments,
        window_passes=[r.windows for r in results],
        read_lengths=[len(seq) for _, seq in reads],
        self_updates=sum(r.self_updates for r in results),
        hop_updates=sum(r.hop_updates for r in results),
        graph=g,
    )
    return results, bt


def reconstruct_path(g: GenomeGraph, q: str, result: AlignResult) -> list:
    """Replay logged direction bits backwards into an explicit match path.

    Greedy: start at the lowest-id end node, and at each earlier position
    take the lowest-id predecessor whose logged state holds the bit.  The
    returned path spells the matched prefix of ``q``.
    """
    if result.trace is None:
        raise TraceError("alignment ran without trace recording")
    if result.score_max < 1:
        raise TraceError("score is zero, nothing to trace")
    W = result.trace.W
    logs = result.trace.logs
    v = int(result.end_nodes[0])
    path = [v]
    pos = result.score_max
    while pos > 1:
        window = (pos - 2) // W + 1
        bit = 1 << ((pos - 2) % W)
        states = logs.get(window)
        if states is None:
            raise TraceError(f"window {window} evicted from the trace buffer")
        nxt = -1
        for t in range(g.pred_ptr[v], g.pred_ptr[v + 1]):
            u = int(g.pred_idx[t])
            if states[u] & bit:
                nxt = u
                break  # predecessor lists are sorted, lowest id wins
        if nxt < 0:
            raise TraceError(f"no predecessor witnesses position {pos - 1}")
        v = nxt
        path.append(v)
        pos -= 1
    path.reverse()
    return path


def dump_alignments(path: str, read_ids, results, paths=None) -> None:
    """TSV: read_id, score_max, lowest end node (-1 if none), optional path."""
    with open(path, "w") as fh:
        for idx, (rid, res) in enumerate(zip(read_ids, results)):
            end = int(res.end_nodes[0]) if res.end_nodes.size else -1
            row = f"{rid}\t{res.score_max}\t{end}"
            if paths is not None:
                row += "\t" + ",".join(str(v) for v in paths[idx])
            fh.write(row + "\n")
