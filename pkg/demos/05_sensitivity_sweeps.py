"""The three device sensitivity sweeps, printed as plot-ready tables.

The tile sweep rebuilds the partition hierarchy of a two-million-arc
clique-chain graph at each unit size, so it takes a few seconds.
"""

from graphdp import sweep_pe_density, sweep_sram, sweep_tile_size

print("matrix unit size (normalized to N=1024):")
print("  N      latency  energy")
for N, lat, en in sweep_tile_size([256, 512, 1024, 2048]):
    print(f"  {N:<6d} {lat:7.3f}  {en:6.3f}")
print("  the bowl: small units drown in merges, big units waste occupancy")

print("\nPEs per channel:")
print("  PEs    Mreads/s  bw_util")
for c, thr, util in sweep_pe_density([16, 32, 64, 128, 192]):
    print(f"  {c:<6d} {thr / 1e6:8.3f}  {util:.2f}")
print("  compute-bound until the stream saturates, flat afterwards")

print("\nshared SRAM capacity (long-read workload, 192 KiB working set):")
print("  KiB    spill_MB  reads/s")
for cap, _, irr, thr in sweep_sram([65536, 131072, 196608, 262144, 524288]):
    print(f"  {cap // 1024:<6d} {irr / 1e6:8.1f}  {thr:8.1f}")
print("  spills stop once the working set fits; beyond that, nothing moves")
