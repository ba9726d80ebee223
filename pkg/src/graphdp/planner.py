"""Workload lowering: descriptor in, staged execution plan out.

The descriptor names a workload (a distance closure over a weighted graph,
or a read batch against a genome graph) plus device overrides.  lower()
turns it into an ordered stage list mirroring the engine's phase structure;
execute() walks the plan by delegating to the engines, so plan outputs are
the engine outputs by construction, and optionally attaches a cost report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .apsp import recursive_apsp
from .costmodel import (
    CostReport,
    HbmParams,
    PcmParams,
    model_recursive_apsp,
    model_traversal,
)
from .graphs import (
    GenomeGraph,
    GraphError,
    ReadBatch,
    SHORT_READ_THRESHOLD,
    WeightedGraph,
    load_edge_list,
    load_fasta,
    load_genome_graph,
    split_by_length,
)
from .partition import build_hierarchy
from .s2g import MODE_LONG, MODE_SHORT, batch_align

TILE_MATRIX = "matrix"
TILE_TRAVERSAL = "traversal"
TILE_HOST = "host"

K_PARTITION = "PartitionBuild"
K_FW_CLOSE = "FwClose"
K_BOUNDARY_FW = "BoundaryFw"
K_INJECT = "Inject"
K_MERGE = "Merge"
K_MASK = "MaskBuild"
K_ALIGN = "AlignBatch"

# which tile may run which stage kind
_TILE_OF = {
    K_PARTITION: TILE_HOST,
    K_FW_CLOSE: TILE_MATRIX,
    K_BOUNDARY_FW: TILE_MATRIX,
    K_INJECT: TILE_MATRIX,
    K_MERGE: TILE_MATRIX,
    K_MASK: TILE_HOST,
    K_ALIGN: TILE_TRAVERSAL,
}


class PlanError(ValueError):
    pass


class DescriptorError(PlanError):
    pass


class StageError(PlanError):
    def __init__(self, stage_id: str, cause: str):
        self.stage_id = stage_id
        super().__init__(f"stage {stage_id} failed: {cause}")


def select_mapping(read_len: int, threshold: int = SHORT_READ_THRESHOLD) -> str:
    """Mapping mode by read length: grouped PEs up to the threshold
    (inclusive), one deep pipeline beyond it."""
    if read_len < 1:
        raise DescriptorError(f"read length {read_len} out of range")
    return MODE_SHORT if read_len <= threshold else MODE_LONG


@dataclass
class WorkloadDescriptor:
    kind: str  # "apsp" | "s2g"
    graph: object
    reads: list | None = None
    max_tile: int = 1024
    W: int = 128
    mode: str = "auto"  # s2g only: auto | short | long
    pcm: PcmParams | None = None
    hbm: HbmParams | None = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.kind == "apsp":
            if not isinstance(self.graph, WeightedGraph):
                raise DescriptorError("apsp workload needs a weighted graph")
        elif self.kind == "s2g":
            if not isinstance(self.graph, GenomeGraph):
                raise DescriptorError("s2g workload needs a genome graph")
            if not self.reads:
                raise DescriptorError("s2g workload needs reads")
        else:
            raise DescriptorError(f"unknown workload kind {self.kind!r}")
        if self.mode not in ("auto", "short", "long"):
            raise DescriptorError(f"unknown mapping request {self.mode!r}")


def _device_params(section: dict | None):
    """Apply JSON deltas on top of the device defaults."""
    pcm = hbm = None
    if section:
        if "pcm" in section:
            pcm = replace(PcmParams(), **section["pcm"])
        if "hbm" in section:
            hbm = replace(HbmParams(), **section["hbm"])
    return pcm, hbm


def load_descriptor(doc: dict | str) -> WorkloadDescriptor:
    """Build a descriptor from a JSON document or a path to one.

    File references inside the document are loaded and validated here, so
    a returned descriptor is always runnable.
    """
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DescriptorError("descriptor must be an object with a 'kind'")
    kind = doc["kind"]
    pcm, hbm = _device_params(doc.get("device"))
    common = dict(
        seed=int(doc.get("seed", 0)),
        threads=int(doc.get("threads", 1)),
        pcm=pcm,
        hbm=hbm,
    )
    try:
        if kind == "apsp":
            g = load_edge_list(doc["graph"])
            return WorkloadDescriptor(
                "apsp", g, max_tile=int(doc.get("max_tile", 1024)), **common
            )
        if kind == "s2g":
            g = load_genome_graph(doc["graph"])
            reads = load_fasta(doc["reads"])
            return WorkloadDescriptor(
                "s2g",
                g,
                reads=reads,
                W=int(doc.get("W", 128)),
                mode=doc.get("mode", "auto"),
                **common,
            )
    except (OSError, KeyError, GraphError) as e:
        raise DescriptorError(f"descriptor input failed to load: {e}") from e
    raise DescriptorError(f"unknown workload kind {kind!r}")


@dataclass
class Stage:
    id: str
    kind: str
    tile: str
    inputs: list
    outputs: list
    mapping: str | None = None

    def _as_dict(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind,
            "tile": self.tile,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
        }
        if self.mapping is not None:
            out["mapping"] = self.mapping
        return out


@dataclass
class ExecutionPlan:
    workload: WorkloadDescriptor
    stages: list = field(default_factory=list)

    def validate(self) -> None:
        """Dataflow must be acyclic (inputs precede) and tile-specialized."""
        produced = {"graph", "reads"}
        seen = set()
        for st in self.stages:
            if st.id in seen:
                raise PlanError(f"duplicate stage id {st.id}")
            seen.add(st.id)
            if _TILE_OF[st.kind] != st.tile:
                raise PlanError(f"stage {st.id}: kind {st.kind} cannot run on {st.tile}")
            for name in st.inputs:
                if name not in produced:
                    raise PlanError(f"stage {st.id}: input {name!r} never produced")
            produced.update(st.outputs)

    def counts(self) -> dict:
        out: dict[str, int] = {}
        for st in self.stages:
            out[st.kind] = out.get(st.kind, 0) + 1
        return out

    def to_json(self) -> str:
        doc = {
            "workload": self.workload.kind,
            "stages": [st._as_dict() for st in self.stages],
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _lower_apsp(w: WorkloadDescriptor) -> ExecutionPlan:
    hier = build_hierarchy(w.graph, max_tile=w.max_tile, seed=w.seed)
    stages = [Stage("s0.partition", K_PARTITION, TILE_HOST, ["graph"], ["hier"])]
    for li, lv in enumerate(hier.levels):
        for c in range(lv.partition.k):
            stages.append(
                Stage(
                    f"L{li}.close.c{c}",
                    K_FW_CLOSE,
                    TILE_MATRIX,
                    ["hier"],
                    [f"block.L{li}.c{c}"],
                )
            )
    # downward: per level one boundary closure, one inject, pairwise merge
    # candidates, and one fold through the comparator tree
    for li in range(hier.depth - 1, -1, -1):
        lv = hier.levels[li]
        bsizes = [lv.boundaries.of(c).size for c in range(lv.partition.k)]
        if not sum(bsizes):
            continue
        blocks = [f"block.L{li}.c{c}" for c in range(lv.partition.k)]
        above = [f"assembled.L{li + 1}"] if li + 1 < hier.depth else []
        stages.append(
            Stage(
                f"L{li}.boundary_fw",
                K_BOUNDARY_FW,
                TILE_MATRIX,
                ["hier"] + blocks + above,
                [f"closure.L{li}"],
            )
        )
        stages.append(
            Stage(
                f"L{li}.inject",
                K_INJECT,
                TILE_MATRIX,
                [f"closure.L{li}"] + blocks,
                [f"injected.L{li}"],
            )
        )
        cands = []
        for c1 in range(lv.partition.k):
            for c2 in range(c1 + 1, lv.partition.k):
                if bsizes[c1] == 0 or bsizes[c2] == 0:
                    continue
                name = f"cand.L{li}.c{c1}-c{c2}"
                stages.append(
                    Stage(
                        f"L{li}.merge.c{c1}-c{c2}",
                        K_MERGE,
                        TILE_MATRIX,
                        [f"injected.L{li}"],
                        [name],
                    )
                )
                cands.append(name)
        stages.append(
            Stage(
                f"L{li}.fold",
                K_MERGE,
                TILE_MATRIX,
                [f"injected.L{li}"] + cands,
                [f"assembled.L{li}"],
            )
        )
    plan = ExecutionPlan(w, stages)
    plan.validate()
    return plan


def _lower_s2g(w: WorkloadDescriptor) -> ExecutionPlan:
    stages = [Stage("s0.masks", K_MASK, TILE_HOST, ["graph"], ["masks"])]
    if w.mode == "auto":
        short, long_ = split_by_length(w.reads)
        batches = [(b, select_mapping(max(len(s) for _, s in b.reads)))
                   for b in (short, long_) if b.reads]
    elif w.mode == "short":
        too_long = [r for r, s in w.reads if len(s) > SHORT_READ_THRESHOLD]
        if too_long:
            raise DescriptorError(
                f"read {too_long[0]} too long for forced short mapping"
            )
        batches = [(ReadBatch(list(w.reads), "short"), MODE_SHORT)]
    else:
        batches = [(ReadBatch(list(w.reads), "long"), MODE_LONG)]
    for i, (batch, mapping) in enumerate(batches):
        stages.append(
            Stage(
                f"align.{batch.length_class}",
                K_ALIGN,
                TILE_TRAVERSAL,
                ["graph", "reads", "masks"],
                [f"scores.{i}"],
                mapping=mapping,
            )
        )
    plan = ExecutionPlan(w, stages)
    plan.validate()
    plan._batches = batches  # lowered read split, reused by execute
    return plan


def lower(w: WorkloadDescriptor) -> ExecutionPlan:
    """Deterministic descriptor-to-plan lowering."""
    if w.kind == "apsp":
        return _lower_apsp(w)
    return _lower_s2g(w)


def _run_stage(stage_id: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as e:  # noqa: BLE001 - rethrown with stage attribution
        raise StageError(stage_id, str(e)) from e


def execute(plan: ExecutionPlan, cost_model_on: bool = False) -> dict:
    """Walk the plan by delegating to the engines.

    Functional outputs match direct engine calls exactly; the cost model
    only reads traces, so toggling it cannot perturb results.
    """
    plan.validate()
    w = plan.workload
    if w.kind == "apsp":
        hier = _run_stage(
            plan.stages[0].id,
            build_hierarchy,
            w.graph,
            max_tile=w.max_tile,
            seed=w.seed,
        )
        first_matrix = next(s.id for s in plan.stages if s.tile == TILE_MATRIX)
        res = _run_stage(
            first_matrix,
            recursive_apsp,
            w.graph,
            max_tile=w.max_tile,
            hierarchy=hier,
            seed=w.seed,
            threads=w.threads,
        )
        out = {"apsp": res}
        if cost_model_on:
            out["cost"] = model_recursive_apsp(res.trace, w.pcm or PcmParams())
        return out

    results = {}
    traces = []
    cost = CostReport()
    for st, (batch, mapping) in zip(
        [s for s in plan.stages if s.kind == K_ALIGN], plan._batches
    ):
        aligned, bt = _run_stage(
            st.id, batch_align, w.graph, batch, mode=mapping, W=w.W
        )
        traces.append(bt)
        for (rid, _), r in zip(sorted(batch.reads, key=lambda rs: rs[0]), aligned):
            results[rid] = r
        if cost_model_on:
            cost = cost + model_traversal(bt, w.hbm or HbmParams())
    out = {"s2g": results, "traces": traces}
    if cost_model_on:
        out["cost"] = cost
    return out
