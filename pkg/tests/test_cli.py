import json
import os
from dataclasses import replace

import numpy as np

import graphdp.cli as cli
from graphdp.apsp import load_distances
from graphdp.cli import main
from graphdp.graphs import (
    WeightedGraph,
    distance_init,
    dump_edge_list,
    load_edge_list,
    load_fasta,
    load_genome_graph,
)
from graphdp.minplus import floyd_warshall_dense


def run(*argv):
    return main([str(a) for a in argv])


def _gen_inputs(tmp_path, bases=2000, reads=6, read_len=90, sub_rate=0.0, seed=3):
    d = tmp_path / "in"
    rc = run(
        "gen", "genome", "--bases", bases, "--bubble-rate", "0.02",
        "--reads", reads, "--read-len", read_len, "--sub-rate", sub_rate,
        "--seed", seed, "--out", d,
    )
    assert rc == 0
    return str(d / "graph.gfa"), str(d / "reads.fa")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def test_gen_er_round_trips(tmp_path, capsys):
    assert run("gen", "er", "--n", 150, "--p", 0.03, "--seed", 42,
               "--out", tmp_path) == 0
    g = load_edge_list(str(tmp_path / "graph.edges"))
    assert g.n == 150 and g.edge_count > 0
    cfg = json.loads((tmp_path / "run.json").read_text())
    assert cfg["command"] == "gen.er" and cfg["seed"] == 42
    out = capsys.readouterr().out
    assert "n=150" in out and "seed=42" in out


def test_gen_nws_round_trips(tmp_path):
    assert run("gen", "nws", "--n", 120, "--k", 6, "--p", 0.1,
               "--out", tmp_path) == 0
    g = load_edge_list(str(tmp_path / "graph.edges"))
    # ring lattice floor: both arcs stored
    assert g.edge_count >= 120 * 6


def test_gen_genome_outputs_reload(tmp_path):
    gfa, reads = _gen_inputs(tmp_path, bases=1500, reads=4)
    g = load_genome_graph(gfa)
    assert g.n >= 1500
    assert len(load_fasta(reads)) == 4
    ref = load_fasta(str(tmp_path / "in" / "ref.fa"))
    assert ref[0][0] == "ref" and len(ref[0][1]) == 1500


def test_gen_missing_params_is_usage_error(tmp_path):
    assert run("gen", "er", "--p", 0.1, "--out", tmp_path) == 2
    assert run("gen", "genome", "--out", tmp_path) == 2
    assert run("gen", "nws", "--n", 50, "--p", 0.1, "--out", tmp_path) == 2


def test_gen_bad_params_is_usage_error(tmp_path):
    assert run("gen", "er", "--n", -5, "--p", 0.1, "--out", tmp_path) == 2
    assert run("gen", "er", "--n", 10, "--p", 1.5, "--out", tmp_path) == 2


# ---------------------------------------------------------------------------
# apsp
# ---------------------------------------------------------------------------


def test_apsp_exports_and_verifies(tmp_path, capsys):
    assert run("gen", "er", "--n", 120, "--p", 0.04, "--seed", 9,
               "--out", tmp_path) == 0
    rc = run("apsp", "--graph", tmp_path / "graph.edges", "--max-tile", 32,
             "--verify", "--fmt", "tsv", "--out", tmp_path)
    assert rc == 0
    assert "PASS" in capsys.readouterr().out
    got = load_distances(str(tmp_path / "dist.tsv"))
    g = load_edge_list(str(tmp_path / "graph.edges"))
    assert np.array_equal(got, floyd_warshall_dense(distance_init(g)))


def test_apsp_disconnected_renders_inf(tmp_path):
    g = WeightedGraph(3, np.array([0]), np.array([1]), np.array([7]))
    dump_edge_list(g, str(tmp_path / "g.edges"))
    assert run("apsp", "--graph", tmp_path / "g.edges", "--fmt", "tsv",
               "--out", tmp_path) == 0
    text = (tmp_path / "dist.tsv").read_text()
    assert "inf" in text and "\t7" in text.splitlines()[0]


def test_apsp_model_emits_cost_reports(tmp_path):
    assert run("gen", "er", "--n", 90, "--p", 0.05, "--out", tmp_path) == 0
    assert run("apsp", "--graph", tmp_path / "graph.edges", "--max-tile", 32,
               "--model", "--out", tmp_path) == 0
    csv_text = (tmp_path / "cost.csv").read_text()
    assert csv_text.startswith("phase,cycles,ns,pJ")
    doc = json.loads((tmp_path / "cost.json").read_text())
    assert doc["cycles"] > 0
    cfg = json.loads((tmp_path / "run.json").read_text())
    assert cfg["device"]["pcm"]["unit_dim"] == 1024


def test_apsp_missing_graph_file_is_usage_error(tmp_path):
    assert run("apsp", "--graph", tmp_path / "nope.edges",
               "--out", tmp_path) == 2


# ---------------------------------------------------------------------------
# s2g
# ---------------------------------------------------------------------------


def test_s2g_exact_reads_score_full_length(tmp_path):
    gfa, reads = _gen_inputs(tmp_path, reads=5, read_len=80, sub_rate=0.0)
    out = tmp_path / "o"
    assert run("s2g", "--graph", gfa, "--reads", reads, "--verify",
               "--out", out) == 0
    rows = [ln.split("\t") for ln in (out / "scores.tsv").read_text().splitlines()]
    assert len(rows) == 5
    assert all(int(r[1]) == 80 for r in rows)


def test_s2g_w_sweep_scores_invariant_cycles_reported(tmp_path):
    gfa, reads = _gen_inputs(tmp_path, reads=4, read_len=70, sub_rate=0.05)
    out = tmp_path / "o"
    rc = run("s2g", "--graph", gfa, "--reads", reads,
             "--W-sweep", "32,64,128", "--out", out)
    assert rc == 0
    lines = (out / "wsweep.csv").read_text().splitlines()
    assert lines[0].startswith("# columns: W,cycles")
    data = [ln for ln in lines if not ln.startswith("#")]
    assert len(data) == 3
    assert [int(ln.split(",")[0]) for ln in data] == [32, 64, 128]


def test_s2g_verify_failure_names_read_and_exits_1(tmp_path, monkeypatch, capsys):
    gfa, reads = _gen_inputs(tmp_path, reads=3, read_len=60)
    real = cli.align_reference
    monkeypatch.setattr(
        cli, "align_reference",
        lambda g, q: replace(real(g, q), score_max=real(g, q).score_max + 1),
    )
    rc = run("s2g", "--graph", gfa, "--reads", reads, "--verify",
             "--out", tmp_path / "o")
    assert rc == 1
    assert "FAIL read r" in capsys.readouterr().out


def test_s2g_model_reports_throughput(tmp_path):
    gfa, reads = _gen_inputs(tmp_path, reads=4)
    out = tmp_path / "o"
    assert run("s2g", "--graph", gfa, "--reads", reads, "--model",
               "--out", out) == 0
    doc = json.loads((out / "model.json").read_text())
    assert doc["reads"] == 4 and doc["reads_per_s"] > 0
    assert doc["cost"]["cycles"] > 0


def test_s2g_forced_short_on_long_reads_is_usage_error(tmp_path):
    gfa, reads = _gen_inputs(tmp_path, bases=3000, reads=2, read_len=400)
    assert run("s2g", "--graph", gfa, "--reads", reads, "--mode", "short",
               "--out", tmp_path / "o") == 2


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_roofline_has_convention_column(tmp_path):
    assert run("sweep", "roofline", "--out", tmp_path) == 0
    lines = (tmp_path / "roofline.csv").read_text().splitlines()
    assert lines[0] == "# columns: kernel,ops_per_byte,convention"
    assert lines[1].startswith("# config:")
    kernels = {ln.split(",")[0] for ln in lines[2:]}
    assert kernels == {"FwClassic", "FwPartitioned", "S2G"}
    fw = next(ln for ln in lines[2:] if ln.startswith("FwPartitioned"))
    assert abs(float(fw.split(",")[1]) - 512.0) < 1e-6


def test_sweep_pe_and_sram_emit_curves(tmp_path):
    assert run("sweep", "pe", "--counts", "16,64,128", "--out", tmp_path) == 0
    pe = [ln for ln in (tmp_path / "pe.csv").read_text().splitlines()
          if not ln.startswith("#")]
    assert len(pe) == 3
    thr = [float(ln.split(",")[1]) for ln in pe]
    assert thr[1] > thr[0]

    assert run("sweep", "sram", "--caps", "64K..256K", "--out", tmp_path) == 0
    sr = [ln for ln in (tmp_path / "sram.csv").read_text().splitlines()
          if not ln.startswith("#")]
    assert [int(ln.split(",")[0]) for ln in sr] == [65536, 131072, 262144]
    irr = [float(ln.split(",")[2]) for ln in sr]
    assert irr == sorted(irr, reverse=True)


def test_sweep_bad_list_is_usage_error(tmp_path):
    assert run("sweep", "pe", "--counts", "a,b", "--out", tmp_path) == 2
    assert run("sweep", "sram", "--caps", "512K..32K", "--out", tmp_path) == 2


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def test_plan_apsp_dump(tmp_path):
    assert run("gen", "er", "--n", 200, "--p", 0.03, "--seed", 1,
               "--out", tmp_path) == 0
    assert run("plan", "--workload", "apsp", "--graph", tmp_path / "graph.edges",
               "--max-tile", 64, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "plan.json").read_text())
    assert doc["workload"] == "apsp"
    assert doc["stages"][0]["kind"] == "PartitionBuild"


def test_plan_mixed_batch_shows_two_align_stages(tmp_path):
    gfa, _ = _gen_inputs(tmp_path, bases=3000, reads=0)
    short = [("s0", "ACGT" * 20), ("s1", "ACGT" * 25)]
    long_ = [("l0", "ACGT" * 100)]
    reads_path = tmp_path / "mixed.fa"
    with open(reads_path, "w") as fh:
        for rid, seq in short + long_:
            fh.write(f">{rid}\n{seq}\n")
    assert run("plan", "--workload", "s2g", "--graph", gfa,
               "--reads", reads_path, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "plan.json").read_text())
    aligns = [s for s in doc["stages"] if s["kind"] == "AlignBatch"]
    assert len(aligns) == 2
    assert {s["mapping"] for s in aligns} == {"short-parallel", "long-pipeline"}


def test_plan_without_inputs_is_usage_error(tmp_path):
    assert run("plan", "--out", tmp_path) == 2


# ---------------------------------------------------------------------------
# config overrides, determinism, exit codes
# ---------------------------------------------------------------------------


def test_config_overrides_device_params(tmp_path):
    cfgp = tmp_path / "dev.json"
    cfgp.write_text(json.dumps({"pcm": {"unit_dim": 512}}))
    assert run("gen", "er", "--n", 80, "--p", 0.05, "--out", tmp_path) == 0
    assert run("apsp", "--graph", tmp_path / "graph.edges", "--model",
               "--config", cfgp, "--out", tmp_path) == 0
    cfg = json.loads((tmp_path / "run.json").read_text())
    assert cfg["device"]["pcm"]["unit_dim"] == 512


def test_config_unknown_field_is_usage_error(tmp_path):
    cfgp = tmp_path / "dev.json"
    cfgp.write_text(json.dumps({"pcm": {"no_such_knob": 1}}))
    assert run("gen", "er", "--n", 40, "--p", 0.05, "--out", tmp_path) == 0
    assert run("apsp", "--graph", tmp_path / "graph.edges",
               "--config", cfgp, "--out", tmp_path) == 2


def test_reruns_are_byte_identical(tmp_path):
    d = tmp_path / "w"
    cmds = [
        ("gen", "genome", "--bases", 1200, "--bubble-rate", "0.03",
         "--reads", 5, "--read-len", 80, "--sub-rate", 0.02, "--seed", 11,
         "--out", d),
        ("s2g", "--graph", d / "graph.gfa", "--reads", d / "reads.fa",
         "--model", "--W-sweep", "32,128", "--seed", 11, "--out", d),
        ("sweep", "roofline", "--out", d),
    ]
    for c in cmds:
        assert run(*c) == 0
    before = {name: (d / name).read_bytes() for name in sorted(os.listdir(d))}
    for c in cmds:
        assert run(*c) == 0
    after = {name: (d / name).read_bytes() for name in sorted(os.listdir(d))}
    assert before == after


def test_unknown_subcommand_exits_2():
    assert run("frobnicate") == 2


def test_verify_command_all_suites_pass(tmp_path, capsys):
    assert run("verify", "--seed", 5, "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "FAIL" not in out
