"""
DP against brute force on random instances
==========================================

Every instance is solved twice, once by the belief dynamic program and once by
searching strategy tables directly.  The two numbers are exact rationals and
must agree to the last digit.
"""

import time

from nestedteam.oracle import Dims, run_battery

for dims, count in ((Dims(horizon=1), 20), (Dims(horizon=2), 3)):
    start = time.perf_counter()
    rows = run_battery(dims, count, seed=1)
    for row in rows:
        print(row.line())
    print(f"-- {sum(r.match for r in rows)}/{count} match in {time.perf_counter() - start:.1f}s\n")
