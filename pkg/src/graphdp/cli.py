"""Command-line harness: generators, engine drivers, sweeps, verification.

Every command resolves its flags against defaults, runs deterministically
for a given seed, and writes a ``run.json`` next to its data outputs with
the fully resolved configuration.  Data payloads carry no timestamps, so a
rerun with the same inputs is byte-identical.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from .apsp import export_distances, recursive_apsp
from .costmodel import (
    HbmParams,
    ModelError,
    PcmParams,
    arithmetic_intensity,
    model_fw_block,
    model_mp_merge,
    sweep_pe_density,
    sweep_sram,
    sweep_tile_size,
    working_set_bytes,
)
from .graphs import (
    GraphError,
    distance_init,
    dump_edge_list,
    dump_fasta,
    gen_er,
    gen_genome,
    gen_nws,
    gen_reads,
    load_edge_list,
    load_fasta,
    load_genome_graph,
    parse_gfa,
)
from .minplus import DistanceBlock, floyd_warshall_dense
from .partition import build_boundary_graph, find_boundary, kway_partition
from .planner import (
    DescriptorError,
    PlanError,
    WorkloadDescriptor,
    execute,
    load_descriptor,
    lower,
)
from .s2g import align_reference, align_windowed, dump_alignments

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2

DEFAULT_TILE_NS = "256,512,1024,2048"
DEFAULT_PE_COUNTS = "16,32,64,128,192"
DEFAULT_SRAM_CAPS = "32K..512K"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _parse_ints(text: str) -> list:
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise UsageError(f"bad integer list {text!r}") from e
    if not vals:
        raise UsageError(f"empty list {text!r}")
    return vals


def _parse_size(tok: str) -> int:
    t = tok.strip().upper()
    mult = 1
    if t.endswith("K"):
        mult, t = 1024, t[:-1]
    elif t.endswith("M"):
        mult, t = 1024 * 1024, t[:-1]
    try:
        return int(t) * mult
    except ValueError as e:
        raise UsageError(f"bad size {tok!r}") from e


def _parse_sizes(text: str) -> list:
    # "32K..512K" doubles from low to high inclusive; otherwise comma list
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = _parse_size(lo_s), _parse_size(hi_s)
        if lo <= 0 or hi < lo:
            raise UsageError(f"bad size range {text!r}")
        caps = []
        c = lo
        while c <= hi:
            caps.append(c)
            c *= 2
        return caps
    return [_parse_size(tok) for tok in text.split(",") if tok.strip()]


def _device(config_path: str | None):
    """Resolve device parameters from an optional JSON override file."""
    pcm, hbm = PcmParams(), HbmParams()
    if config_path:
        with open(config_path) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        try:
            if "pcm" in doc:
                pcm = replace(pcm, **doc["pcm"])
            if "hbm" in doc:
                hbm = replace(hbm, **doc["hbm"])
        except TypeError as e:
            raise UsageError(f"unknown device field: {e}") from e
    return pcm, hbm


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _emit_run(outdir: str, cfg: dict) -> str:
    path = os.path.join(outdir, "run.json")
    with open(path, "w") as fh:
        fh.write(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(path: str, columns, rows, cfg: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# columns: " + ",".join(columns) + "\n")
        fh.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
        wr = csv.writer(fh)
        for row in rows:
            wr.writerow(row)


def _base_cfg(args, command: str) -> dict:
    return {
        "command": command,
        "seed": args.seed,
        "threads": args.threads,
        "out": args.out,
    }


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _require(args, names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(
            f"gen {args.kind} requires " + ", ".join("--" + n for n in missing)
        )


def cmd_gen(args) -> int:
    outdir = _outdir(args)
    cfg = _base_cfg(args, f"gen.{args.kind}")
    if args.kind in ("er", "nws"):
        if args.kind == "er":
            _require(args, ["n", "p"])
            g = gen_er(args.n, args.p, args.seed, args.w_max)
            cfg.update(n=args.n, p=args.p, w_max=args.w_max)
        else:
            _require(args, ["n", "k", "p"])
            g = gen_nws(args.n, args.k, args.p, args.seed, args.w_max)
            cfg.update(n=args.n, k=args.k, p=args.p, w_max=args.w_max)
        path = os.path.join(outdir, "graph.edges")
        dump_edge_list(g, path)
        cfg["outputs"] = ["graph.edges"]
        _emit_run(outdir, cfg)
        print(f"{args.kind}: n={g.n} edges={g.edge_count} seed={args.seed} -> {path}")
        return EXIT_OK

    _require(args, ["bases"])
    gfa, ref = gen_genome(args.bases, args.bubble_rate, args.seed)
    gfa_path = os.path.join(outdir, "graph.gfa")
    with open(gfa_path, "w") as fh:
        fh.write(gfa)
    ref_path = os.path.join(outdir, "ref.fa")
    dump_fasta([("ref", ref)], ref_path)
    outputs = ["graph.gfa", "ref.fa"]
    g = parse_gfa(gfa)
    if args.reads:
        reads = gen_reads(g, args.reads, args.read_len, args.sub_rate, args.seed)
        dump_fasta(reads, os.path.join(outdir, "reads.fa"))
        outputs.append("reads.fa")
    cfg.update(
        bases=args.bases,
        bubble_rate=args.bubble_rate,
        reads=args.reads,
        read_len=args.read_len,
        sub_rate=args.sub_rate,
        outputs=outputs,
    )
    _emit_run(outdir, cfg)
    print(
        f"genome: nodes={g.n} arcs={g.succ_idx.size} seed={args.seed} -> {gfa_path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# apsp
# ---------------------------------------------------------------------------


def cmd_apsp(args) -> int:
    outdir = _outdir(args)
    pcm, _ = _device(args.config)
    g = load_edge_list(args.graph)
    w = WorkloadDescriptor(
        "apsp",
        g,
        max_tile=args.max_tile,
        pcm=pcm,
        seed=args.seed,
        threads=args.threads,
    )
    out = execute(lower(w), cost_model_on=args.model)
    res = out["apsp"]

    dist_name = "dist.tsv" if args.fmt == "tsv" else "dist.bin"
    dist_path = os.path.join(outdir, dist_name)
    export_distances(res, dist_path, fmt=args.fmt)
    outputs = [dist_name]

    if args.model:
        rep = out["cost"]
        with open(os.path.join(outdir, "cost.csv"), "w") as fh:
            fh.write(rep.to_csv())
        with open(os.path.join(outdir, "cost.json"), "w") as fh:
            fh.write(rep.to_json() + "\n")
        outputs += ["cost.csv", "cost.json"]

    cfg = _base_cfg(args, "apsp")
    cfg.update(
        graph=args.graph,
        max_tile=args.max_tile,
        fmt=args.fmt,
        verify=args.verify,
        model=args.model,
        device={"pcm": asdict(pcm)},
        outputs=outputs,
    )
    _emit_run(outdir, cfg)
    print(
        f"apsp: n={g.n} mode={res.mode} depth={res.trace.depth} -> {dist_path}"
    )

    if args.verify:
        want = floyd_warshall_dense(distance_init(g))
        got = res.to_dense()
        bad = np.argwhere(got != want)
        if bad.size:
            u, v = (int(x) for x in bad[0])
            print(
                f"FAIL ({u},{v}): got {int(got[u, v])} want {int(want[u, v])}"
            )
            return EXIT_VERIFY
        print("PASS")
    return EXIT_OK


# ---------------------------------------------------------------------------
# s2g
# ---------------------------------------------------------------------------


def _s2g_run(g, reads, mode, W, hbm, seed, threads, with_cost):
    w = WorkloadDescriptor(
        "s2g", g, reads=reads, W=W, mode=mode, hbm=hbm, seed=seed, threads=threads
    )
    return execute(lower(w), cost_model_on=with_cost)


def cmd_s2g(args) -> int:
    outdir = _outdir(args)
    _, hbm = _device(args.config)
    g = load_genome_graph(args.graph)
    reads = load_fasta(args.reads)
    if not reads:
        raise UsageError(f"no reads in {args.reads}")

    sweep_ws = _parse_ints(args.W_sweep) if args.W_sweep else None
    out = _s2g_run(
        g, reads, args.mode, args.W, hbm, args.seed, args.threads,
        args.model or sweep_ws is not None,
    )
    results = out["s2g"]
    ids = sorted(results)

    scores_path = os.path.join(outdir, "scores.tsv")
    dump_alignments(scores_path, ids, [results[r] for r in ids])
    outputs = ["scores.tsv"]

    cfg = _base_cfg(args, "s2g")
    cfg.update(
        graph=args.graph,
        reads=args.reads,
        mode=args.mode,
        W=args.W,
        W_sweep=sweep_ws,
        verify=args.verify,
        model=args.model,
        device={"hbm": asdict(hbm)},
    )

    if sweep_ws:
        # scores must not move with the window width; cycles may
        rows = []
        for Wi in sweep_ws:
            oi = _s2g_run(g, reads, args.mode, Wi, hbm, args.seed, args.threads, True)
            for rid in ids:
                if oi["s2g"][rid].score_max != results[rid].score_max:
                    print(
                        f"FAIL read {rid}: score moved between W={args.W} "
                        f"and W={Wi}"
                    )
                    return EXIT_VERIFY
            rep = oi["cost"]
            rows.append(
                (Wi, f"{rep.cycles:.6g}", f"{rep.wall_time_s * 1e9:.6g}",
                 f"{rep.energy_j * 1e12:.6g}")
            )
        _write_csv(
            os.path.join(outdir, "wsweep.csv"),
            ["W", "cycles", "ns", "pJ"],
            rows,
            cfg,
        )
        outputs.append("wsweep.csv")

    if args.model:
        rep = out["cost"]
        total_reads = len(ids)
        doc = {
            "reads": total_reads,
            "wall_s": rep.wall_time_s,
            "reads_per_s": total_reads / rep.wall_time_s if rep.wall_time_s else 0.0,
            "energy_j": rep.energy_j,
            "cost": json.loads(rep.to_json()),
        }
        with open(os.path.join(outdir, "model.json"), "w") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        outputs.append("model.json")

    cfg["outputs"] = outputs
    _emit_run(outdir, cfg)
    print(f"s2g: reads={len(ids)} mode={args.mode} -> {scores_path}")

    if args.verify:
        by_id = dict(reads)
        for rid in ids:
            want = align_reference(g, by_id[rid])
            got = results[rid]
            if got.score_max != want.score_max or not np.array_equal(
                got.end_nodes, want.end_nodes
            ):
                print(
                    f"FAIL read {rid}: got {got.score_max} "
                    f"want {want.score_max}"
                )
                return EXIT_VERIFY
        print("PASS")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def cmd_sweep(args) -> int:
    outdir = _outdir(args)
    pcm, hbm = _device(args.config)
    cfg = _base_cfg(args, f"sweep.{args.kind}")
    path = os.path.join(outdir, f"{args.kind}.csv")

    if args.kind == "tilesize":
        Ns = _parse_ints(args.Ns)
        cfg.update(Ns=Ns, device={"pcm": asdict(pcm)})
        rows = [
            (N, f"{lat:.6g}", f"{en:.6g}")
            for N, lat, en in sweep_tile_size(Ns, p=pcm, seed=args.seed)
        ]
        _write_csv(
            path,
            ["N", "norm_latency", "norm_energy"],
            rows,
            {**cfg, "normalized_to": 1024},
        )
    elif args.kind == "pe":
        counts = _parse_ints(args.counts)
        cfg.update(counts=counts, device={"hbm": asdict(hbm)})
        rows = [
            (c, f"{thr:.6g}", f"{util:.6g}")
            for c, thr, util in sweep_pe_density(counts, h=hbm)
        ]
        _write_csv(path, ["pe_per_channel", "reads_per_s", "bandwidth_util"], rows, cfg)
    elif args.kind == "sram":
        caps = _parse_sizes(args.caps)
        cfg.update(caps=caps, device={"hbm": asdict(hbm)})
        rows = [
            (cap, f"{reg:.6g}", f"{irr:.6g}", f"{thr:.6g}")
            for cap, reg, irr, thr in sweep_sram(caps, h=hbm)
        ]
        _write_csv(
            path,
            ["capacity_bytes", "hbm_regular_bytes", "hbm_irregular_bytes",
             "reads_per_s"],
            rows,
            cfg,
        )
    else:
        cfg.update(n=args.n)
        reports = [
            arithmetic_intensity("FwClassic"),
            arithmetic_intensity("FwPartitioned", n=args.n),
            arithmetic_intensity("S2G"),
        ]
        rows = [
            (r.kernel, f"{r.ops_per_byte:.6g}", r.convention) for r in reports
        ]
        _write_csv(path, ["kernel", "ops_per_byte", "convention"], rows, cfg)

    cfg["outputs"] = [f"{args.kind}.csv"]
    _emit_run(outdir, cfg)
    print(f"sweep {args.kind}: {len(rows)} points -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def cmd_plan(args) -> int:
    outdir = _outdir(args)
    if args.desc:
        w = load_descriptor(args.desc)
    elif args.workload == "apsp":
        if not args.graph:
            raise UsageError("plan --workload apsp requires --graph")
        pcm, _ = _device(args.config)
        w = WorkloadDescriptor(
            "apsp",
            load_edge_list(args.graph),
            max_tile=args.max_tile,
            pcm=pcm,
            seed=args.seed,
            threads=args.threads,
        )
    elif args.workload == "s2g":
        if not (args.graph and args.reads):
            raise UsageError("plan --workload s2g requires --graph and --reads")
        _, hbm = _device(args.config)
        w = WorkloadDescriptor(
            "s2g",
            load_genome_graph(args.graph),
            reads=load_fasta(args.reads),
            W=args.W,
            mode=args.mode,
            hbm=hbm,
            seed=args.seed,
            threads=args.threads,
        )
    else:
        raise UsageError("plan requires --desc or --workload")

    plan = lower(w)
    path = os.path.join(outdir, "plan.json")
    with open(path, "w") as fh:
        fh.write(plan.to_json() + "\n")
    cfg = _base_cfg(args, "plan")
    cfg.update(
        desc=args.desc,
        workload=w.kind,
        stages=len(plan.stages),
        outputs=["plan.json"],
    )
    _emit_run(outdir, cfg)
    counts = " ".join(f"{k}={v}" for k, v in sorted(plan.counts().items()))
    print(f"plan: {w.kind} stages={len(plan.stages)} ({counts}) -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: trimmed oracle suites, one line per suite
# ---------------------------------------------------------------------------


def _suite_apsp(seed: int, threads: int):
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(6):
        n = int(rng.integers(30, 300))
        p = float(rng.uniform(0.01, 0.05))
        cases.append(gen_er(n, p, seed + i))
    for i in range(4):
        n = int(rng.integers(50, 250))
        cases.append(gen_nws(n, 6, 0.1, seed + 100 + i))
    bad = 0
    for i, g in enumerate(cases):
        res = recursive_apsp(g, max_tile=64 if i % 2 else 128, seed=seed,
                             threads=threads)
        want = floyd_warshall_dense(distance_init(g))
        if not np.array_equal(res.to_dense(), want):
            bad += 1
    return f"{len(cases) - bad}/{len(cases)} graphs", bad == 0


def _suite_boundary(seed: int):
    rng = np.random.default_rng(seed + 1)
    checked = bad = 0
    for i in range(6):
        n = int(rng.integers(80, 350))
        g = gen_er(n, float(rng.uniform(0.02, 0.05)), seed + 10 + i)
        p = kway_partition(g, 3 + i % 3, seed=seed)
        bs = find_boundary(g, p)
        if bs.union.size == 0:
            continue
        d0 = distance_init(g)
        intra = {}
        for c in range(p.k):
            ids = p.component(c)
            intra[c] = DistanceBlock(
                floyd_warshall_dense(d0[np.ix_(ids, ids)]), ids
            )
        gb = build_boundary_graph(g, p, bs, intra)
        got = floyd_warshall_dense(distance_init(gb))
        want = floyd_warshall_dense(distance_init(g))[np.ix_(bs.union, bs.union)]
        checked += 1
        if not np.array_equal(got, want):
            bad += 1
    return f"{checked - bad}/{checked} graphs", bad == 0 and checked > 0


def _suite_s2g(seed: int):
    rng = np.random.default_rng(seed + 2)
    checked = bad = 0
    for i in range(10):
        gfa, _ = gen_genome(int(rng.integers(300, 800)), 0.03, seed + 20 + i)
        g = parse_gfa(gfa)
        length = int(rng.integers(40, 200))
        for rid, q in gen_reads(g, 2, length, 0.05, seed + 40 + i):
            ref = align_reference(g, q)
            for W in (8, 64, 256):
                got = align_windowed(g, q, W=W)
                checked += 1
                if got.score_max != ref.score_max or not np.array_equal(
                    got.end_nodes, ref.end_nodes
                ):
                    bad += 1
    return f"{checked - bad}/{checked} alignments", bad == 0


def _suite_constants():
    ok = (
        model_mp_merge(1024, 512).phases["reduce"].cycles == 1024 * 13
        and model_fw_block(1024, pivots=1).cycles == 480
        and working_set_bytes(16384, 128) == 262144
    )
    return "comparator tree, block closure, state footprint", ok


def _suite_roofline():
    fw = arithmetic_intensity("FwPartitioned", n=1024).ops_per_byte
    classic = arithmetic_intensity("FwClassic").ops_per_byte
    ok = abs(fw - 512.0) <= 0.02 * 512.0 and abs(classic - 0.167) <= 0.0167
    return f"FwPartitioned={fw:g} FwClassic={classic:.3g}", ok


def cmd_verify(args) -> int:
    suites = [
        ("apsp-exactness", lambda: _suite_apsp(args.seed, args.threads)),
        ("boundary-soundness", lambda: _suite_boundary(args.seed)),
        ("s2g-oracle", lambda: _suite_s2g(args.seed)),
        ("model-constants", lambda: _suite_constants()),
        ("roofline", lambda: _suite_roofline()),
    ]
    failures = 0
    for name, fn in suites:
        detail, ok = fn()
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} suite(s) failed")
        return EXIT_VERIFY
    print("all suites passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument(
        "--config", default=None,
        help="JSON device overrides, e.g. {\"pcm\": {...}, \"hbm\": {...}}",
    )
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(
        prog="graphdp",
        description="Exact graph closures and read alignment with a device "
        "cost model.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="synthesize inputs")
    g.add_argument("kind", choices=["er", "nws", "genome"])
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--k", type=int)
    g.add_argument("--w-max", type=int, default=100)
    g.add_argument("--bases", type=int)
    g.add_argument("--bubble-rate", type=float, default=0.02)
    g.add_argument("--reads", type=int, default=0, help="also sample reads")
    g.add_argument("--read-len", type=int, default=100)
    g.add_argument("--sub-rate", type=float, default=0.0)
    g.set_defaults(fn=cmd_gen)

    a = sub.add_parser("apsp", parents=[common], help="close a weighted graph")
    a.add_argument("--graph", required=True, help="edge-list file")
    a.add_argument("--max-tile", type=int, default=1024)
    a.add_argument("--fmt", choices=["bin", "tsv"], default="bin")
    a.add_argument("--verify", action="store_true",
                   help="cross-check against the dense closure")
    a.add_argument("--model", action="store_true", help="attach cost report")
    a.set_defaults(fn=cmd_apsp)

    s = sub.add_parser("s2g", parents=[common], help="align reads to a graph")
    s.add_argument("--graph", required=True, help="graph file (GFA subset)")
    s.add_argument("--reads", required=True, help="FASTA reads")
    s.add_argument("--mode", choices=["auto", "short", "long"], default="auto")
    s.add_argument("--W", type=int, default=128, help="window width")
    s.add_argument("--W-sweep", default=None,
                   help="comma list of widths; checks score invariance")
    s.add_argument("--verify", action="store_true",
                   help="cross-check every read against the reference scorer")
    s.add_argument("--model", action="store_true",
                   help="attach throughput/energy report")
    s.set_defaults(fn=cmd_s2g)

    w = sub.add_parser("sweep", parents=[common], help="emit sensitivity curves")
    w.add_argument("kind", choices=["tilesize", "pe", "sram", "roofline"])
    w.add_argument("--Ns", default=DEFAULT_TILE_NS, help="tile sizes")
    w.add_argument("--counts", default=DEFAULT_PE_COUNTS, help="PEs per channel")
    w.add_argument("--caps", default=DEFAULT_SRAM_CAPS,
                   help="SRAM bytes, comma list or lo..hi doubling range")
    w.add_argument("--n", type=int, default=1024, help="roofline tile size")
    w.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("plan", parents=[common], help="dump an execution plan")
    p.add_argument("--desc", default=None, help="workload descriptor JSON")
    p.add_argument("--workload", choices=["apsp", "s2g"], default=None)
    p.add_argument("--graph", default=None)
    p.add_argument("--reads", default=None)
    p.add_argument("--max-tile", type=int, default=1024)
    p.add_argument("--W", type=int, default=128)
    p.add_argument("--mode", choices=["auto", "short", "long"], default="auto")
    p.set_defaults(fn=cmd_plan)

    v = sub.add_parser("verify", parents=[common], help="run the oracle suites")
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, ModelError, PlanError, DescriptorError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
