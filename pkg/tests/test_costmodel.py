import math

import numpy as np
import pytest

from graphdp.apsp import recursive_apsp
from graphdp.costmodel import (
    CapacityError,
    CostReport,
    HbmParams,
    ModelError,
    PcmParams,
    ValidationError,
    arithmetic_intensity,
    default_pe_workload,
    default_sram_workload,
    make_tile_workload,
    make_traversal_trace,
    model_fw_block,
    model_mp_merge,
    model_recursive_apsp,
    model_traversal,
    sweep_pe_density,
    sweep_sram,
    sweep_tile_size,
    working_set_bytes,
)
from graphdp.graphs import ReadBatch, gen_er, gen_genome, parse_gfa
from graphdp.s2g import MODE_LONG, MODE_SHORT, batch_align


# ---------------------------------------------------------------------------
# frozen device-level constants
# ---------------------------------------------------------------------------


def test_fw_block_single_pivot_cycle_count():
    # 64 add + 64 subtract + 32 bursts x 11 permutation = 480
    rep = model_fw_block(1024, pivots=1)
    assert rep.cycles == 480
    assert rep.phases["add"].cycles == 64
    assert rep.phases["subtract"].cycles == 64
    assert rep.phases["permute"].cycles == 352


def test_fw_block_full_closure_scales_with_pivots():
    rep = model_fw_block(1024)
    assert rep.cycles == 1024 * 480
    assert rep.wall_time_s == pytest.approx(1024 * 480 / 500e6)


def test_fw_block_unpipelined_permutation():
    rep = model_fw_block(1024, pivots=1, overlap=False)
    assert rep.phases["permute"].cycles == 1024 * 11


def test_mp_merge_thirteen_cycles_per_row():
    for rows in (1, 64, 1024, 5000):
        rep = model_mp_merge(rows, 512)
        assert rep.phases["reduce"].cycles == rows * 13


def test_mp_merge_width_independent_reduce():
    # tree latency is a fixed 1/6/6 schedule, not a function of fill
    a = model_mp_merge(1024, 2)
    b = model_mp_merge(1024, 1024)
    assert a.phases["reduce"].cycles == b.phases["reduce"].cycles == 13312


def test_mp_merge_rejects_overwide():
    with pytest.raises(CapacityError):
        model_mp_merge(16, 1025)


def test_fw_block_rejects_oversized():
    with pytest.raises(CapacityError):
        model_fw_block(2048)


def test_fw_block_zero_work():
    assert model_fw_block(0).cycles == 0
    assert model_fw_block(512, pivots=0).cycles == 0
    assert model_mp_merge(0, 16).cycles == 0


def test_working_set_container_size():
    # 16K nodes of 128-bit state fill the 256 KB shared SRAM exactly
    assert working_set_bytes(16384, 128) == 262144
    assert working_set_bytes(16384, 128) == HbmParams().shared_sram_bytes


def test_derate_beyond_design_point():
    p = PcmParams()
    assert p.derate(1024) == 1.0
    assert p.derate(512) == 1.0
    assert p.derate(2048) == pytest.approx(2.0**-1.3)


def test_param_validation():
    with pytest.raises(ValidationError):
        PcmParams(unit_dim=768)
    with pytest.raises(ValidationError):
        PcmParams(clock_hz=0)
    with pytest.raises(ValidationError):
        HbmParams(sram_banks=24)


def test_total_units():
    assert PcmParams().total_units == 130 * 128


# ---------------------------------------------------------------------------
# energy conventions
# ---------------------------------------------------------------------------


def test_fw_block_energy_reads_three_streams():
    p = PcmParams()
    rep = model_fw_block(256, pivots=1, trace=0, p=p)
    want = 3 * 256 * 256 * 32 * p.read_energy_pj * 1e-12
    assert rep.energy_j == pytest.approx(want)
    assert rep.pcm_writes == 0


def test_fw_block_write_energy_follows_trace_count():
    p = PcmParams()
    base = model_fw_block(256, pivots=1, trace=0, p=p)
    rep = model_fw_block(256, pivots=1, trace=1000, p=p)
    extra = rep.energy_j - base.energy_j
    assert extra == pytest.approx(1000 * 32 * p.write_energy_pj * 1e-12)
    assert rep.pcm_writes == 1000


def test_write_asymmetry_dominates_per_bit():
    p = PcmParams()
    assert p.write_energy_pj / p.read_energy_pj == pytest.approx(11.2)


def test_merge_energy_linear_in_shape():
    a = model_mp_merge(100, 128)
    b = model_mp_merge(200, 128)
    assert b.energy_j == pytest.approx(2 * a.energy_j)
    assert b.pcm_writes == 2 * a.pcm_writes


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def test_report_addition_accumulates_counters():
    a = CostReport(cycles=10, wall_time_s=1e-6, energy_j=1e-9, hbm_bytes_regular=64)
    b = CostReport(cycles=5, wall_time_s=2e-6, energy_j=3e-9, hbm_bytes_irregular=32)
    c = a + b
    assert c.cycles == 15
    assert c.wall_time_s == pytest.approx(3e-6)
    assert c.energy_j == pytest.approx(4e-9)
    assert c.hbm_bytes_total == 96


def test_report_rejects_negative():
    with pytest.raises(ValidationError):
        CostReport(cycles=-1)


def test_report_csv_shape():
    rep = model_fw_block(128, pivots=4)
    lines = rep.to_csv().strip().split("\n")
    assert lines[0] == "phase,cycles,ns,pJ,bytes_regular,bytes_irregular,writes"
    names = [ln.split(",")[0] for ln in lines[1:]]
    assert names == ["add", "permute", "subtract", "total"]


def test_report_json_round_trip():
    import json

    rep = model_mp_merge(64, 16)
    doc = json.loads(rep.to_json())
    assert doc["cycles"] == rep.cycles
    assert set(doc["phases"]) == {"add1", "add2", "reduce"}
    # deterministic serialization
    assert rep.to_json() == model_mp_merge(64, 16).to_json()


# ---------------------------------------------------------------------------
# recursive closure model against engine traces
# ---------------------------------------------------------------------------


def test_single_tile_trace_equals_one_block():
    g = gen_er(80, 0.08, seed=3)
    res = recursive_apsp(g, max_tile=128)
    rep = model_recursive_apsp(res.trace)
    # depth-1, no boundary: the whole run is exactly one warm closure
    direct = model_fw_block(80)
    assert rep.wall_time_s == pytest.approx(direct.wall_time_s)
    assert rep.energy_j == pytest.approx(direct.energy_j)
    assert rep.hbm_bytes_total == 0


def test_two_equal_components_close_in_parallel():
    # two disjoint 50-vertex cliques: same latency as one, twice the energy
    edges = []
    for base in (0, 50):
        edges += [
            (base + a, base + b, 1)
            for a in range(50)
            for b in range(50)
            if a != b
        ]
    from graphdp.graphs import WeightedGraph

    g = WeightedGraph.from_edges(100, edges)
    res = recursive_apsp(g, max_tile=64, k_fn=lambda n: 2)
    both = model_recursive_apsp(res.trace)
    single = model_recursive_apsp(
        recursive_apsp(
            WeightedGraph.from_edges(
                50, [(a, b, 1) for a in range(50) for b in range(50) if a != b]
            ),
            max_tile=64,
        ).trace
    )
    assert both.wall_time_s == pytest.approx(single.wall_time_s)
    assert both.energy_j == pytest.approx(2 * single.energy_j)


def test_recursive_model_sums_hand_trace():
    from graphdp.apsp import ExecutionTrace, FwEvent, MergeEvent

    tr = ExecutionTrace(
        depth=2,
        mode="dense",
        fw_events=[
            FwEvent(0, 512, "close"),
            FwEvent(0, 512, "close"),
            FwEvent(0, 512, "reclose"),
            FwEvent(0, 512, "reclose"),
            FwEvent(2, 64, "top"),
        ],
        merge_events=[MergeEvent(1, 256, 256, 32, 32)],
        inject_pairs=64,
    )
    rep = model_recursive_apsp(tr)
    blk = model_fw_block(512)
    top = model_fw_block(64)
    from graphdp.costmodel import _mp_split

    m1 = _mp_split(256 * 32, 32, PcmParams())
    m2 = _mp_split(256 * 256, 32, PcmParams())
    stage = 256 * 256 * 4
    inject = math.ceil(64 / 32) * 10 / 500e6
    want = (
        blk.wall_time_s  # two closes in parallel
        + blk.wall_time_s  # two recloses in parallel
        + top.wall_time_s
        + max(m1.wall_time_s, m2.wall_time_s, stage / PcmParams().hbm_bandwidth)
        + inject
    )
    assert rep.wall_time_s == pytest.approx(want, rel=1e-9)
    assert rep.hbm_bytes_regular == stage
    assert rep.pcm_writes > 0
    assert 0 < rep.utilization["units"] <= 1


def test_recursive_model_cold_load_toggle():
    g = gen_er(60, 0.1, seed=4)
    res = recursive_apsp(g, max_tile=32)
    warm = model_recursive_apsp(res.trace)
    cold = model_recursive_apsp(res.trace, include_cold_load=True)
    assert cold.wall_time_s > warm.wall_time_s
    assert cold.hbm_bytes_regular > warm.hbm_bytes_regular
    assert "cold_load" in cold.phases and "cold_load" not in warm.phases


def test_recursive_model_rejects_non_trace():
    with pytest.raises(ValidationError):
        model_recursive_apsp({"depth": 1})


# ---------------------------------------------------------------------------
# traversal model
# ---------------------------------------------------------------------------


def make_small_batch(mode=None, W=32, n=400, reads=8, length=120, seed=7):
    gfa, _ = gen_genome(n, 0.05, seed=seed)
    g = parse_gfa(gfa)
    rng = np.random.default_rng(seed)
    recs = []
    for i in range(reads):
        recs.append((f"r{i}", "".join(rng.choice(list("ACGT"), size=length))))
    batch = ReadBatch(recs, "short")
    _, bt = batch_align(g, batch, mode=mode, W=W)
    return bt


def test_traversal_mode_mismatch_rejected():
    bt = make_small_batch(mode=MODE_SHORT)
    with pytest.raises(ValidationError):
        model_traversal(bt, mode=MODE_LONG)
    rep = model_traversal(bt, mode=MODE_SHORT)
    assert rep.wall_time_s > 0


def test_traversal_no_spill_when_state_fits():
    bt = make_small_batch(W=32, n=300)
    rep = model_traversal(bt)
    assert rep.hbm_bytes_irregular == 0
    assert rep.phases["spill"].cycles == 0


def test_traversal_spills_past_sram():
    h = HbmParams(shared_sram_bytes=1024)
    bt = make_small_batch(W=128, n=800)
    rep = model_traversal(bt, h)
    assert rep.hbm_bytes_irregular > 0
    assert rep.wall_time_s > model_traversal(bt).wall_time_s


def test_traversal_throughput_reported():
    bt = make_small_batch()
    rep = model_traversal(bt)
    thr = rep.utilization["throughput_reads_per_s"]
    assert thr == pytest.approx(bt.reads / rep.wall_time_s)


def test_synthetic_trace_matches_engine_shape():
    g = parse_gfa(gen_genome(300, 0.05, seed=9)[0])
    rng = np.random.default_rng(9)
    recs = [
        (f"r{i}", "".join(rng.choice(list("ACGT"), size=100))) for i in range(6)
    ]
    _, engine_bt = batch_align(g, ReadBatch(recs, "short"), W=32)
    synth = make_traversal_trace(g, [100] * 6, W=32)
    assert synth.mode == engine_bt.mode
    assert synth.groups == engine_bt.groups
    # synthesized passes assume no early exit, so they bound the engine's
    assert sum(synth.window_passes) >= sum(engine_bt.window_passes)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def test_pe_density_knee():
    rows = sweep_pe_density([16, 64, 128, 192])
    thr = {c: t for c, t, _ in rows}
    assert thr[64] / thr[16] >= 2.5
    assert thr[192] / thr[128] <= 1.05


def test_pe_density_monotone_nondecreasing():
    rows = sweep_pe_density([16, 32, 64, 128, 192])
    thr = [t for _, t, _ in rows]
    assert all(b >= a * 0.999 for a, b in zip(thr, thr[1:]))


def test_pe_density_bandwidth_saturates():
    rows = sweep_pe_density([16, 192])
    util = {c: u for c, _, u in rows}
    assert util[192] == pytest.approx(1.0)
    assert all(0 < u <= 1.0 for u in util.values())


def test_sram_sweep_irregular_monotone_and_zero_at_coverage():
    caps = [32768, 65536, 131072, 196608, 262144, 524288]
    rows = sweep_sram(caps)
    irr = [r[2] for r in rows]
    assert all(b <= a for a, b in zip(irr, irr[1:]))
    # the default workload's working set is 192 KB
    assert irr[caps.index(196608)] == 0
    assert irr[caps.index(262144)] == 0


def test_sram_sweep_throughput_flat_past_coverage():
    rows = sweep_sram([196608, 262144, 524288])
    thr = [r[3] for r in rows]
    assert max(thr) / min(thr) - 1 < 0.02


def test_sram_sweep_regular_constant():
    rows = sweep_sram([65536, 262144])
    assert rows[0][1] == rows[1][1]


def test_tile_workload_shape():
    g = make_tile_workload()
    assert g.n == 131072
    assert 1.9e6 < g.src.size < 2.1e6


def test_tile_sweep_ratios():
    rows = sweep_tile_size([256, 512, 1024, 2048])
    lat = {N: r for N, r, _ in rows}
    assert lat[1024] == 1.0
    for N, want in ((256, 2.41), (512, 1.28), (2048, 2.29)):
        assert abs(lat[N] - want) / want <= 0.15, (N, lat[N])
    # optimum sits at the 1024 design point, convex on both sides
    assert lat[256] > lat[512] > lat[1024] < lat[2048]


def test_tile_sweep_energy_monotone_in_tile():
    rows = sweep_tile_size([256, 512, 1024, 2048])
    en = [e for _, _, e in rows]
    assert all(b > a for a, b in zip(en, en[1:]))


def test_sweeps_reject_empty():
    with pytest.raises(ValidationError):
        sweep_pe_density([])
    with pytest.raises(ValidationError):
        sweep_sram([])
    with pytest.raises(ValidationError):
        sweep_tile_size([])


# ---------------------------------------------------------------------------
# roofline
# ---------------------------------------------------------------------------


def test_intensity_partitioned_fw():
    rep = arithmetic_intensity("FwPartitioned", 1024)
    assert rep.ops_per_byte == pytest.approx(512.0, rel=0.02)


def test_intensity_classic_fw():
    rep = arithmetic_intensity("FwClassic")
    assert rep.ops_per_byte == pytest.approx(1 / 6, rel=0.10)


def test_intensity_s2g():
    rep = arithmetic_intensity("S2G")
    assert rep.ops_per_byte == pytest.approx(2 / 38)


def test_intensity_rejects_unknown():
    with pytest.raises(ValidationError):
        arithmetic_intensity("GEMM")
    with pytest.raises(ValidationError):
        arithmetic_intensity("FwPartitioned")


def test_intensity_ordering():
    fw = arithmetic_intensity("FwPartitioned", 1024).ops_per_byte
    classic = arithmetic_intensity("FwClassic").ops_per_byte
    s2g = arithmetic_intensity("S2G").ops_per_byte
    assert fw > classic > s2g
