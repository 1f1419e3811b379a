"""Box slope of the Cantor-type round-tree model against 1 + log V / log H."""
import sys
import time

from hypb.round_tree import product_stabilization_check

CASES = {(2, 3): [5, 6, 7, 8], (2, 2): [6, 8, 10], (3, 5): [3, 4, 5]}

for (V, H), depths in CASES.items():
    t = time.perf_counter()
    table = product_stabilization_check(V, H, depths)
    print(f"V={V} H={H} target={table.rows[0].target:.6f} decreasing={table.decreasing} ({time.perf_counter() - t:.2f}s)")
    for r in table.rows:
        print(f"  k={r.k:2d} slope={r.slope:.6f} gap={r.gap:.6f}")
sys.exit(0)
