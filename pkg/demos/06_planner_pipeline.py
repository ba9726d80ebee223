"""Descriptor to plan to execution: the same workload as a staged pipeline,
with the cost model riding along without touching results."""

import json

from graphdp import WorkloadDescriptor, execute, gen_genome, gen_reads, lower, parse_gfa
from graphdp.planner import select_mapping

gfa, _ = gen_genome(2500, 0.02, seed=8)
g = parse_gfa(gfa)
reads = gen_reads(g, 6, 100, 0.02, seed=1) + gen_reads(g, 2, 600, 0.01, seed=2)

print("mapping rule:", select_mapping(100), "/", select_mapping(600))

w = WorkloadDescriptor("s2g", g, reads=reads, mode="auto")
plan = lower(w)
print(f"\nplan ({len(plan.stages)} stages):")
for st in plan.stages:
    extra = f" [{st.mapping}]" if st.mapping else ""
    print(f"  {st.id:14s} {st.kind:12s} on {st.tile}{extra}")

doc = json.loads(plan.to_json())
assert [s["id"] for s in doc["stages"]] == [st.id for st in plan.stages]

out = execute(plan, cost_model_on=True)
print("\nscores:", {r: out["s2g"][r].score_max for r in sorted(out["s2g"])})
print(f"modeled wall time: {out['cost'].wall_time_s * 1e6:.1f} us")

# toggling the cost model cannot perturb results
off = execute(plan, cost_model_on=False)
assert {r: v.score_max for r, v in off["s2g"].items()} == {
    r: v.score_max for r, v in out["s2g"].items()
}
print("cost model on/off: identical alignment results")
