"""Cycle, energy, and traffic models of the two accelerator tiles.

Matrix tile: crossbar units run Floyd-Warshall pivots (bit-serial add and
subtract-compare, a burst-pipelined permutation engine) and min-plus merge
reductions (a fixed-depth comparator tree).  Traversal tile: PE groups over
banked shared SRAM fed by HBM, with state spills once the per-read working
set outgrows the SRAM.

Everything here is an analytic model over execution traces; nothing feeds
back into functional results.  Reports carry a nested phase breakdown and
serialize to JSON (nested) or CSV (one row per phase).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .apsp import ExecutionTrace
from .graphs import WeightedGraph
from .minplus import PanelTrace
from .partition import PartitionHierarchy, build_hierarchy
from .s2g import MODE_LONG, SHORT_GROUP_COUNT, BatchTrace, classify_self_hop

MP_TREE_INPUTS = 1024  # comparator tree width is a fixed structure
DEFAULT_IMPROVE_FRAC = 0.1  # assumed strict-improvement rate without a trace
KNUTH_HASH = 2654435761
LINE_BYTES = 64


class ModelError(ValueError):
    pass


class CapacityError(ModelError):
    pass


class ValidationError(ModelError):
    pass


@dataclass
class PcmParams:
    """Matrix-tile device constants (crossbar storage + bit-serial logic)."""

    read_energy_pj: float = 0.05
    write_energy_pj: float = 0.56
    read_latency_ns: float = 2.0
    write_latency_ns: float = 20.0
    clock_hz: float = 500e6
    unit_dim: int = 1024
    units_per_tile: int = 130
    tiles_per_die: int = 128
    bits: int = 32
    add_cycles_per_bit: int = 2
    sub_cycles_per_bit: int = 2
    freq_derate_alpha: float = 1.3
    burst_rows: int = 32  # permutation DMA burst height
    merge_drain_lanes: int = 13312  # die-level merge drain width, rows in flight
    hbm_bandwidth: float = 819.2e9  # B/s, staging stream
    cold_bandwidth: float = 8e9  # B/s, cold-tier stream

    def __post_init__(self):
        for name in (
            "read_energy_pj",
            "write_energy_pj",
            "clock_hz",
            "unit_dim",
            "units_per_tile",
            "tiles_per_die",
            "bits",
            "burst_rows",
        ):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.unit_dim & (self.unit_dim - 1):
            raise ValidationError("unit_dim must be a power of two")

    @property
    def total_units(self) -> int:
        return self.units_per_tile * self.tiles_per_die

    def derate(self, dim: int) -> float:
        """Clock multiplier: RC-limited slowdown beyond the 1024 design point."""
        if dim <= 1024:
            return 1.0
        return (dim / 1024.0) ** (-self.freq_derate_alpha)


@dataclass
class HbmParams:
    """Traversal-tile device constants (PEs, banked SRAM, HBM channels)."""

    channels: int = 16
    banks_per_channel: int = 32
    read_energy_pj: float = 0.4
    write_energy_pj: float = 0.45
    access_latency_ns: float = 15.0  # midpoint of the 10-20 ns range
    pe_per_pu: int = 64
    shared_sram_bytes: int = 262144
    sram_banks: int = 32
    bank_access_cycles: int = 1
    pe_clock_hz: float = 1e9
    srf_bits: int = 384
    pattern_buffer_bytes: int = 256
    tbm_bytes: int = 4096
    bplu_width: int = 128
    hbm_bandwidth: float = 819.2e9  # B/s aggregate
    stream_efficiency: float = 0.5  # strided CSR bursts half-fill lines

    def __post_init__(self):
        if self.pe_per_pu % (self.pe_per_pu // SHORT_GROUP_COUNT or 1):
            raise ValidationError("pe_per_pu must divide into short-mode groups")
        if self.sram_banks & (self.sram_banks - 1):
            raise ValidationError("sram_banks must be a power of two")
        if self.pe_per_pu <= 0 or self.channels <= 0:
            raise ValidationError("pe and channel counts must be positive")

    @property
    def bw_per_pu(self) -> float:
        return self.hbm_bandwidth / self.channels


@dataclass
class CostReport:
    cycles: float = 0.0
    wall_time_s: float = 0.0
    energy_j: float = 0.0
    hbm_bytes_regular: float = 0.0
    hbm_bytes_irregular: float = 0.0
    pcm_writes: float = 0.0
    utilization: dict = field(default_factory=dict)
    phases: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in (
            "cycles",
            "wall_time_s",
            "energy_j",
            "hbm_bytes_regular",
            "hbm_bytes_irregular",
            "pcm_writes",
        ):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    @property
    def hbm_bytes_total(self) -> float:
        return self.hbm_bytes_regular + self.hbm_bytes_irregular

    def __add__(self, other: "CostReport") -> "CostReport":
        merged = dict(self.phases)
        for k, v in other.phases.items():
            merged[k] = merged[k] + v if k in merged else v
        return CostReport(
            cycles=self.cycles + other.cycles,
            wall_time_s=self.wall_time_s + other.wall_time_s,
            energy_j=self.energy_j + other.energy_j,
            hbm_bytes_regular=self.hbm_bytes_regular + other.hbm_bytes_regular,
            hbm_bytes_irregular=self.hbm_bytes_irregular + other.hbm_bytes_irregular,
            pcm_writes=self.pcm_writes + other.pcm_writes,
            phases=merged,
        )

    def _as_dict(self) -> dict:
        out = {
            "cycles": self.cycles,
            "ns": self.wall_time_s * 1e9,
            "pJ": self.energy_j * 1e12,
            "bytes_regular": self.hbm_bytes_regular,
            "bytes_irregular": self.hbm_bytes_irregular,
            "writes": self.pcm_writes,
        }
        if self.utilization:
            out["utilization"] = dict(sorted(self.utilization.items()))
        if self.phases:
            out["phases"] = {k: v._as_dict() for k, v in sorted(self.phases.items())}
        return out

    def to_json(self) -> str:
        return json.dumps(self._as_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        cols = "phase,cycles,ns,pJ,bytes_regular,bytes_irregular,writes"
        rows = [cols]

        def emit(name, rep):
            rows.append(
                f"{name},{rep.cycles:.6g},{rep.wall_time_s * 1e9:.6g},"
                f"{rep.energy_j * 1e12:.6g},{rep.hbm_bytes_regular:.6g},"
                f"{rep.hbm_bytes_irregular:.6g},{rep.pcm_writes:.6g}"
            )
            for sub, subrep in sorted(rep.phases.items()):
                emit(f"{name}.{sub}", subrep)

        for k, v in sorted(self.phases.items()):
            emit(k, v)
        emit("total", replace(self, phases={}))
        return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Matrix tile: Floyd-Warshall block closure
# ---------------------------------------------------------------------------


def _perm_cycles(rows: int, p: PcmParams, overlap: bool) -> int:
    bursts = math.ceil(rows / p.burst_rows)
    if overlap:
        return bursts * (1 + 10)  # 1-cycle read + 10-cycle write per burst
    return rows * 11


def model_fw_block(
    dim: int,
    pivots: int | None = None,
    trace=None,
    p: PcmParams | None = None,
    overlap: bool = True,
) -> CostReport:
    """One crossbar unit closing a dim x dim block over the given pivots.

    Per pivot: one bit-serial add (operand row + column), one subtract-
    compare against the incumbent, and a burst-pipelined permutation pass
    over all rows.  Energy convention per pivot: three full-block operand
    streams are read (two add inputs and the incumbent); only strict
    improvements are written, taken from ``trace`` (a PanelTrace, a list of
    them, or an int count) or estimated at DEFAULT_IMPROVE_FRAC without one.
    """
    p = p or PcmParams()
    if dim > p.unit_dim:
        raise CapacityError(f"block dim {dim} exceeds unit dim {p.unit_dim}")
    if dim < 0:
        raise ValidationError("negative dimension")
    if isinstance(trace, PanelTrace):
        trace = [trace]
    if pivots is None:
        pivots = len(trace) if trace is not None and not isinstance(trace, int) else dim
    if pivots == 0 or dim == 0:
        return CostReport()

    add_c = p.add_cycles_per_bit * p.bits
    sub_c = p.sub_cycles_per_bit * p.bits
    perm_c = _perm_cycles(dim, p, overlap)
    cycles = pivots * (add_c + sub_c + perm_c)
    clock = p.clock_hz * p.derate(dim)
    wall = cycles / clock

    if isinstance(trace, int):
        improved = trace
    elif trace is not None:
        improved = sum(t.improved for t in trace)
    else:
        improved = int(pivots * dim * dim * DEFAULT_IMPROVE_FRAC)
    read_bits = 3.0 * pivots * dim * dim * p.bits
    write_bits = float(improved) * p.bits
    energy = (read_bits * p.read_energy_pj + write_bits * p.write_energy_pj) * 1e-12

    def sub(cyc, en, writes=0.0):
        return CostReport(cyc, cyc / clock, en, pcm_writes=writes)

    read_e = read_bits * p.read_energy_pj * 1e-12
    write_e = write_bits * p.write_energy_pj * 1e-12
    return CostReport(
        cycles=cycles,
        wall_time_s=wall,
        energy_j=energy,
        pcm_writes=float(improved),
        phases={
            "add": sub(pivots * add_c, read_e * 2 / 3),
            "subtract": sub(pivots * sub_c, read_e / 3 + write_e, float(improved)),
            "permute": sub(pivots * perm_c, 0.0),
        },
    )


def model_mp_merge(rows: int, width: int, p: PcmParams | None = None) -> CostReport:
    """Min-plus merge rows through the fixed comparator tree.

    The tree reduces up to 1024 candidates per row on a fixed 1/6/6 schedule
    (stream-in, compare levels, drain), 13 cycles per row regardless of how
    many of its inputs are populated.  Two bit-serial add phases form the
    candidates before reduction.  One result per row is written back.
    """
    p = p or PcmParams()
    if width > MP_TREE_INPUTS:
        raise CapacityError(f"merge width {width} exceeds {MP_TREE_INPUTS}")
    if rows < 0 or width < 0:
        raise ValidationError("negative merge shape")
    if rows == 0:
        return CostReport()
    clock = p.clock_hz
    add_c = p.add_cycles_per_bit * p.bits
    reduce_cycles = rows * 13
    add_cycles = rows * add_c

    read_bits = 3.0 * rows * width * p.bits  # three operand streams
    write_bits = float(rows) * p.bits  # one masked result per row
    read_e = read_bits * p.read_energy_pj * 1e-12
    write_e = write_bits * p.write_energy_pj * 1e-12

    def sub(cyc, en, writes=0.0):
        return CostReport(cyc, cyc / clock, en, pcm_writes=writes)

    total = reduce_cycles + 2 * add_cycles
    return CostReport(
        cycles=total,
        wall_time_s=total / clock,
        energy_j=read_e + write_e,
        pcm_writes=float(rows),
        phases={
            "add1": sub(add_cycles, read_e / 2),
            "add2": sub(add_cycles, read_e / 2),
            "reduce": sub(reduce_cycles, write_e, float(rows)),
        },
    )


def _mp_split(rows: int, width: int, p: PcmParams) -> CostReport:
    """Merge with widths beyond the tree folded into extra partial rows."""
    if width <= MP_TREE_INPUTS:
        return model_mp_merge(rows, width, p)
    parts = math.ceil(width / MP_TREE_INPUTS)
    partial = model_mp_merge(rows * parts, MP_TREE_INPUTS, p)
    combine = model_mp_merge(rows, parts, p)
    return partial + combine


def _blocked_fw(dim: int, p: PcmParams) -> CostReport:
    """Oversized closure decomposed into unit-sized block operations.

    nb = ceil(dim/unit) pivot rounds; each round touches nb^2 blocks which
    spread over the available units.
    """
    nb = math.ceil(dim / p.unit_dim)
    per_block = model_fw_block(p.unit_dim, p=p)
    waves = nb * math.ceil(nb * nb / p.total_units)
    energy_scale = nb**3 / max(1, waves)
    cycles = per_block.cycles * waves
    return CostReport(
        cycles=cycles,
        wall_time_s=per_block.wall_time_s * waves,
        energy_j=per_block.energy_j * waves * energy_scale,
        pcm_writes=per_block.pcm_writes * nb**3,
    )


def _makespan(durations: list, workers: int) -> float:
    """LPT greedy schedule length for independent tasks."""
    if not durations:
        return 0.0
    if len(durations) <= workers:
        return max(durations)
    heap = [0.0] * workers
    for d in sorted(durations, reverse=True):
        i = min(range(workers), key=heap.__getitem__)
        heap[i] += d
    return max(heap)


def model_recursive_apsp(
    trace: ExecutionTrace,
    p: PcmParams | None = None,
    include_cold_load: bool = False,
) -> CostReport:
    """Schedule a recursive-closure trace onto the matrix die.

    Per level: component closures run concurrently across units (parallel
    max over an LPT schedule); the top closure and per-level merges follow.
    Boundary-matrix staging between levels streams at HBM bandwidth and
    overlaps compute (latency takes the max); the base level is assumed
    warm in the crossbars unless ``include_cold_load`` adds the cold-tier
    stream.  Energies and byte counters are summed.
    """
    p = p or PcmParams()
    if not isinstance(trace, ExecutionTrace):
        raise ValidationError("model_recursive_apsp needs an ExecutionTrace")
    U = p.total_units

    total = CostReport()
    wall = 0.0
    by_level_fw: dict = {}
    for ev in trace.fw_events:
        by_level_fw.setdefault((ev.level, ev.kind), []).append(ev.dim)
    merge_by_level: dict = {}
    for ev in trace.merge_events:
        merge_by_level.setdefault(ev.level, []).append(ev)

    def add_phase(name, rep, wall_s):
        nonlocal total, wall
        entry = replace(rep, wall_time_s=wall_s)
        total = total + replace(entry, phases={name: entry})
        wall += wall_s

    for (level, kind), dims in sorted(by_level_fw.items()):
        if kind == "top":
            if dims[0] > p.unit_dim:
                rep = _blocked_fw(dims[0], p)
            else:
                rep = model_fw_block(dims[0], p=p)
            add_phase("top.fw", rep, rep.wall_time_s)
            continue
        reps = [model_fw_block(d, p=p) for d in dims if d > 0]
        if not reps:
            continue
        agg = CostReport()
        for r in reps:
            agg = agg + r
        span = _makespan([r.wall_time_s for r in reps], U)
        add_phase(f"level{level}.{kind}", agg, span)

    for level, events in sorted(merge_by_level.items()):
        reps = []
        stage_bytes = 0.0
        for ev in events:
            # two tree passes: rows through the left boundary, then through
            # the right one
            reps.append(_mp_split(ev.rows * ev.right_boundary, ev.left_boundary, p))
            reps.append(_mp_split(ev.rows * ev.cols, ev.right_boundary, p))
            stage_bytes += ev.rows * ev.cols * (p.bits // 8)
        agg = CostReport()
        for r in reps:
            agg = agg + r
        span = _makespan([r.wall_time_s for r in reps], U)
        if level >= 1:
            agg = agg + CostReport(hbm_bytes_regular=stage_bytes)
            span = max(span, stage_bytes / p.hbm_bandwidth)
        add_phase(f"level{level}.merge", agg, span)

    if trace.inject_pairs:
        bursts = math.ceil(trace.inject_pairs / 32)
        cyc = bursts * 10
        en = trace.inject_pairs * p.bits * p.write_energy_pj * 1e-12
        rep = CostReport(
            cycles=cyc,
            wall_time_s=cyc / p.clock_hz,
            energy_j=en,
            pcm_writes=float(trace.inject_pairs),
        )
        add_phase("inject", rep, rep.wall_time_s)

    if include_cold_load:
        base_dims = by_level_fw.get((0, "close"), [])
        bytes_cold = float(sum(d * d for d in base_dims)) * (p.bits // 8)
        rep = CostReport(
            wall_time_s=bytes_cold / p.cold_bandwidth, hbm_bytes_regular=bytes_cold
        )
        add_phase("cold_load", rep, rep.wall_time_s)

    busy = sum(r.cycles for r in total.phases.values())
    total = replace(
        total,
        wall_time_s=wall,
        cycles=wall * p.clock_hz,
        utilization={"units": busy / (wall * p.clock_hz * U) if wall else 0.0},
    )
    return total


# ---------------------------------------------------------------------------
# Traversal tile
# ---------------------------------------------------------------------------


def working_set_bytes(nodes: int, W: int) -> int:
    """Per-read live state in shared SRAM: one W-bit word per node.

    Carries ride in the per-PE register file and bookkeeping in the
    scratchpad, so the banked SRAM holds exactly the state words."""
    return nodes * (W // 8)


def _bank_conflict_cycles(g, h: HbmParams) -> float:
    """Per-sweep PE cycles: Self nodes forward in one cycle, Hop nodes
    serialize on the worst-hit SRAM bank of their predecessor reads."""
    self_mask = classify_self_hop(g)
    banks = (np.arange(g.n, dtype=np.uint64) * KNUTH_HASH % (1 << 32)) % h.sram_banks
    cycles = 0.0
    for v in range(g.n):
        if self_mask[v]:
            cycles += 1
            continue
        lo, hi = g.pred_ptr[v], g.pred_ptr[v + 1]
        if lo == hi:
            cycles += 1
            continue
        hit = np.bincount(banks[g.pred_idx[lo:hi]].astype(np.int64))
        cycles += int(hit.max()) * h.bank_access_cycles + 1
    return cycles


def model_traversal(
    batch_trace: BatchTrace,
    h: HbmParams | None = None,
    mode: str | None = None,
) -> CostReport:
    """Latency/energy/traffic of one PU executing a batch trace.

    Compute: per window sweep, every node update costs 1 cycle (Self) or a
    bank-serialized read plus issue (Hop); sweeps spread over the PEs.
    Traffic: topology and queries stream as regular bytes (graph once per
    read group per round); state spills past the shared SRAM round-trip as
    irregular bytes with per-line HBM latency added to the wall.
    """
    h = h or HbmParams()
    if mode is not None and mode != batch_trace.mode:
        raise ValidationError(
            f"trace was recorded in mode {batch_trace.mode!r}, not {mode!r}"
        )
    g = getattr(batch_trace, "graph", None)
    if g is None:
        raise ValidationError("batch trace carries no graph reference")

    passes = sum(batch_trace.window_passes)
    per_sweep = _bank_conflict_cycles(g, h)
    compute_cycles = per_sweep * passes
    wall_compute = compute_cycles / h.pe_per_pu

    topo_bytes = 4.0 * (g.pred_idx.size + g.n + 1) + g.n
    if batch_trace.mode == MODE_LONG:
        # state fills the SRAM in long mode, so topology re-streams on
        # every window sweep
        group_streams = max(1, passes)
    else:
        group_streams = max(1, batch_trace.groups) * max(1, batch_trace.rounds)
    regular = (
        topo_bytes * group_streams
        + float(sum(batch_trace.read_lengths))
        + 16.0 * batch_trace.reads
    )
    wall_stream = regular / (h.bw_per_pu * h.stream_efficiency) * h.pe_clock_hz

    ws = working_set_bytes(g.n, batch_trace.W)
    excess = max(0, ws - h.shared_sram_bytes)
    irregular = float(excess) * 2.0 * passes
    spill_cycles = (
        math.ceil(irregular / LINE_BYTES) * h.access_latency_ns * 1e-9 * h.pe_clock_hz
    )

    wall_cycles = max(wall_compute, wall_stream) + spill_cycles
    wall_s = wall_cycles / h.pe_clock_hz
    energy = (
        (regular + irregular) * 8.0 * (h.read_energy_pj + h.write_energy_pj) / 2.0
    ) * 1e-12

    thr = batch_trace.reads / wall_s if wall_s > 0 else 0.0
    return CostReport(
        cycles=wall_cycles,
        wall_time_s=wall_s,
        energy_j=energy,
        hbm_bytes_regular=regular,
        hbm_bytes_irregular=irregular,
        utilization={
            "pe": wall_compute / wall_cycles if wall_cycles else 0.0,
            "bandwidth": wall_stream / wall_cycles if wall_cycles else 0.0,
            "throughput_reads_per_s": thr,
        },
        phases={
            "compute": CostReport(
                cycles=compute_cycles, wall_time_s=wall_compute / h.pe_clock_hz
            ),
            "stream": CostReport(
                wall_time_s=wall_stream / h.pe_clock_hz, hbm_bytes_regular=regular
            ),
            "spill": CostReport(
                cycles=spill_cycles,
                wall_time_s=spill_cycles / h.pe_clock_hz,
                hbm_bytes_irregular=irregular,
            ),
        },
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def make_traversal_trace(g, read_lengths, W: int = 128, mode: str | None = None):
    """Synthesize a BatchTrace without running alignments.

    Window passes assume no early exit (full ceil(len/W) sweeps); the
    Self/Hop split comes from the graph's static classification.  This is
    the modeling stand-in the sweeps use for large synthetic workloads.
    """
    from .s2g import MODE_LONG, MODE_SHORT, BatchConfig

    cfg = BatchConfig()
    if mode is None:
        mode = MODE_SHORT if max(read_lengths) <= 300 else MODE_LONG
    self_n = int(classify_self_hop(g).sum())
    passes = [math.ceil(le / W) for le in read_lengths]
    if mode == MODE_SHORT:
        groups, gsize = cfg.short_groups, cfg.group_size
        assignments = [
            (f"r{j}", j % groups, (j // groups) % gsize)
            for j in range(len(read_lengths))
        ]
    else:
        groups, gsize = 1, cfg.pe_per_pu
        assignments = [
            (f"r{j}", 0, j % cfg.pe_per_pu) for j in range(len(read_lengths))
        ]
    rounds = math.ceil(len(read_lengths) / cfg.pe_per_pu) if read_lengths else 0
    return BatchTrace(
        mode=mode,
        W=W,
        nodes=g.n,
        groups=groups,
        group_size=gsize,
        rounds=rounds,
        assignments=assignments,
        window_passes=passes,
        read_lengths=list(read_lengths),
        self_updates=self_n * sum(passes),
        hop_updates=(g.n - self_n) * sum(passes),
        graph=g,
    )


def _chain_genome(n: int, seed: int):
    """Long linear backbone with sparse skip edges: the long-read stand-in."""
    from .graphs import genome_graph

    rng = np.random.default_rng(seed)
    bases = "".join(rng.choice(list("ACGT"), size=n))
    edges = [(i, i + 1) for i in range(n - 1)]
    skips = rng.integers(0, n - 2, size=max(1, n // 64))
    for s in np.unique(skips):
        t = int(s) + 2
        if t < n:
            edges.append((int(s), t))
    return genome_graph(bases, edges)


def default_pe_workload(h: HbmParams | None = None):
    """Mixed short+long traversal workload for the PE-density sweep.

    Short reads run at W=32 (fine windows, many sweeps per read) so the
    workload stresses the channel; one long read rides along in pipeline
    mode.
    """
    short_g = _chain_genome(2048, seed=11)
    long_g = _chain_genome(4096, seed=12)
    short = make_traversal_trace(short_g, [150] * 2048, W=32)
    long_ = make_traversal_trace(long_g, [10240], W=128)
    return [short, long_]


def sweep_pe_density(
    counts,
    workload=None,
    h: HbmParams | None = None,
):
    """Throughput and bandwidth utilization versus PEs per channel."""
    if not counts:
        raise ValidationError("no PE counts to sweep")
    h = h or HbmParams()
    workload = workload if workload is not None else default_pe_workload(h)
    rows = []
    for p_count in counts:
        hp = replace(h, pe_per_pu=int(p_count))
        wall = 0.0
        reads = 0
        bw_util = 0.0
        for bt in workload:
            rep = model_traversal(bt, hp)
            wall += rep.wall_time_s
            reads += bt.reads
            bw_util = max(bw_util, rep.utilization.get("bandwidth", 0.0))
        rows.append((int(p_count), reads / wall, min(1.0, bw_util)))
    return rows


def default_sram_workload(W: int = 128):
    """Long-read workload whose working set is 192 KB (12288 nodes x 16 B)."""
    g = _chain_genome(12288, seed=21)
    return make_traversal_trace(g, [10240] * 6, W=W)


def sweep_sram(capacities, workload=None, h: HbmParams | None = None):
    """Traffic split and throughput versus shared SRAM capacity."""
    if not capacities:
        raise ValidationError("no capacities to sweep")
    h = h or HbmParams()
    bt = workload if workload is not None else default_sram_workload()
    rows = []
    for cap in capacities:
        rep = model_traversal(bt, replace(h, shared_sram_bytes=int(cap)))
        thr = bt.reads / rep.wall_time_s
        rows.append((int(cap), rep.hbm_bytes_regular, rep.hbm_bytes_irregular, thr))
    return rows


# ---------------------------------------------------------------------------
# Tile-size sweep: real hierarchy builds feed an occupancy latency model
# ---------------------------------------------------------------------------

# clique-chain benchmark: 16-vertex cliques chained by two-pair necks, with
# gateway necks at each power-of-two scale boundary sized so the severed
# boundary shrinks sublinearly as the tile grows
_TILE_WORKLOAD_N = 131072
_CLIQUE = 16


def _gateway_profile(c: int) -> list | None:
    """Neck pattern at clique boundary c, as (tail offset, head offset) pairs.

    None marks a plain intra-block neck (never on an aligned cut).  Scale
    boundaries carry: 15 spread pairs every 128 cliques, a 3:1 mix of
    shared-tail double pairs and single pairs every 64, and single pairs at
    the 32- and 16-clique grid.
    """
    if c % 16:
        return None
    if c % 128 == 0:
        return [(15 - i, i) for i in range(15)]
    if c % 64 == 0:
        u = (c // 64 - 1) // 2  # ordinal among 64-not-128 boundaries
        if u % 4 != 3:
            return [(15, 0), (15, 1)]
        return [(15, 0)]
    return [(15, 0)]


def make_tile_workload(seed: int = 0, n: int = _TILE_WORKLOAD_N) -> WeightedGraph:
    """Synthetic graph with planted community structure at every tile scale.

    A chain of 16-vertex cliques (most of the 2M arcs) is stitched by
    two-pair necks; at clique indices on the 16/32/64/128-clique grid the
    neck follows _gateway_profile, so tiling at N severs exactly the grid
    necks of scales >= N/256 and the boundary set shrinks as tiles grow
    while recursion deepens as they shrink.  Vertex 0 loses half its clique
    arcs so region growth seeds there and walks the chain, giving
    deterministic block-aligned tiles at every power-of-two size.
    """
    rng = np.random.default_rng(seed)
    cliques = n // _CLIQUE
    srcs = []
    dsts = []

    base = np.arange(_CLIQUE, dtype=np.int64)
    ii, jj = np.meshgrid(base, base)
    mask = ii != jj
    ci, cj = ii[mask], jj[mask]
    starts = np.arange(cliques, dtype=np.int64) * _CLIQUE
    srcs.append((starts[:, None] + ci[None, :]).ravel())
    dsts.append((starts[:, None] + cj[None, :]).ravel())

    neck_a = []
    neck_b = []
    for c in range(1, cliques):
        tail = (c - 1) * _CLIQUE
        head = c * _CLIQUE
        prof = _gateway_profile(c)
        if prof is None:
            prof = [(14, 0), (15, 1)]
        for ta, hb in prof:
            neck_a.append(tail + ta)
            neck_b.append(head + hb)
    a = np.asarray(neck_a, dtype=np.int64)
    b = np.asarray(neck_b, dtype=np.int64)
    srcs.extend([a, b])
    dsts.extend([b, a])

    src = np.concatenate(srcs)
    dst = np.concatenate(dsts)
    # thin out vertex 0 so min-degree seeding starts the chain walk there
    drop = (src == 0) & (dst >= 8) & (dst < _CLIQUE)
    drop |= (dst == 0) & (src >= 8) & (src < _CLIQUE)
    src, dst = src[~drop], dst[~drop]
    key = src * np.int64(n) + dst
    _, keep = np.unique(key, return_index=True)
    src, dst = src[keep], dst[keep]
    w = rng.integers(1, 101, size=src.size, dtype=np.int64)
    return WeightedGraph(n, src, dst, w)


def _tile_params(p: PcmParams, N: int) -> PcmParams:
    # the permutation engine sweeps a block in 32 bursts whatever the unit
    # height, so burst rows scale with the unit
    return replace(p, unit_dim=N, burst_rows=max(1, N // 32))


def _hierarchy_cost(g: WeightedGraph, hier: PartitionHierarchy, N: int, p: PcmParams):
    """Matrix-die latency and energy for one tile size.

    Two pools: closure work (block FW at every level, upward and downward,
    plus the top) spreads over the on-die units, whose count scales as
    (1024/N)^2 at constant area, with the clock derated past the 1024
    design point.  Boundary assembly (cross-component merge rows at levels
    above the base) drains through the die-level merge lanes, a fixed
    fixture, so its latency tracks boundary volume rather than unit count.
    """
    pn = _tile_params(p, N)
    units = p.total_units * (1024.0 / N) ** 2
    close_cycles = 0.0
    merge_cycles = 0.0
    energy = 0.0

    for lv in hier.levels:
        for d in lv.partition.sizes():
            rep = model_fw_block(int(d), p=pn)
            close_cycles += 2 * rep.cycles
            energy += 2 * rep.energy_j
    for li in range(1, hier.depth):
        lv = hier.levels[li]
        bset = lv.boundaries
        comps = range(lv.partition.k)
        sizes = lv.partition.sizes()
        dims = {c: int(sizes[c]) for c in comps}
        bs = {c: int(bset.of(c).size) for c in comps}
        for c1 in comps:
            for c2 in comps:
                if c1 == c2 or bs[c1] == 0 or bs[c2] == 0:
                    continue
                rep = _mp_split(dims[c1] * bs[c2], min(bs[c1], MP_TREE_INPUTS), pn)
                rep2 = _mp_split(dims[c1] * dims[c2], min(bs[c2], MP_TREE_INPUTS), pn)
                merge_cycles += rep.cycles + rep2.cycles
                energy += rep.energy_j + rep2.energy_j
    top = hier.top_boundary_graph.n
    if top:
        rep = _blocked_fw(top, pn) if top > N else model_fw_block(top, p=pn)
        close_cycles += rep.cycles
        energy += rep.energy_j

    clock = p.clock_hz * pn.derate(N)
    wall = close_cycles / (units * clock) + merge_cycles / (p.merge_drain_lanes * clock)
    return wall, energy, close_cycles, merge_cycles


def sweep_tile_size(
    Ns, g: WeightedGraph | None = None, p: PcmParams | None = None, seed: int = 0
):
    """Normalized latency and energy versus matrix unit size N.

    Builds the real partition hierarchy at each N (exact-cover component
    counts) and prices it with the occupancy model; results are normalized
    to N=1024.
    """
    if not Ns:
        raise ValidationError("no tile sizes to sweep")
    p = p or PcmParams()
    if g is None:
        g = make_tile_workload(seed)
    points = {}
    for N in Ns:
        hier = build_hierarchy(
            g,
            max_tile=int(N),
            k_fn=lambda n_, N=N: math.ceil(n_ / int(N)),
            seed=seed,
            imbalance=0.0,
        )
        points[int(N)] = _hierarchy_cost(g, hier, int(N), p)
    if 1024 in points:
        base = points[1024]
    else:
        base = points[sorted(points)[len(points) // 2]]
    rows = [
        (N, wall / base[0], en / base[1] if base[1] else 0.0)
        for N, (wall, en, _, _) in sorted(points.items())
    ]
    return rows


# ---------------------------------------------------------------------------
# Roofline
# ---------------------------------------------------------------------------


@dataclass
class IntensityReport:
    kernel: str
    ops_per_byte: float
    convention: str


def arithmetic_intensity(kernel: str, n: int | None = None) -> IntensityReport:
    """Ops-per-byte under explicit counting conventions.

    FwPartitioned(N): the block is loaded once (4 bytes per cell) and every
    inner update performs 2 ops (add, min): 2*N^3 / 4*N^2 = N/2.
    FwClassic: no reuse, each inner update streams 3 words of 4 bytes for
    its 2 ops: 2/12.  S2G: one 2-op state update touches one 4-byte
    topology word per predecessor (about 1.5 on genome graphs), a 16-byte
    state read and a 16-byte write.
    """
    if kernel == "FwPartitioned":
        if n is None or n < 2:
            raise ValidationError("FwPartitioned needs n >= 2")
        return IntensityReport(
            kernel,
            n / 2.0,
            "load-only: n^2 cells x 4 B loaded once; 2 ops per inner update",
        )
    if kernel == "FwClassic":
        return IntensityReport(
            kernel, 2.0 / 12.0, "3 reads x 4 B per inner update, no reuse"
        )
    if kernel == "S2G":
        bytes_per_update = 4 * 1.5 + 16 + 16
        return IntensityReport(
            kernel,
            2.0 / bytes_per_update,
            "2 ops per update; 1.5 topology words + 16 B state read + 16 B write",
        )
    raise ValidationError(f"unknown kernel {kernel!r}")
