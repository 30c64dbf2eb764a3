"""
Sizes, timings and round trips
==============================

Sweep the three schemes over document sizes, plot the result, then
compare issuance latency of offline delegation with the co-signing
baseline when the issuer is sometimes unreachable.
"""

import random

import numpy as np

from credsig.delegation.simulator import LatencyModel, compare, periodic_downtime
from credsig.harness import BenchConfig, export_report, run_bench

# a short sweep; the CLI default goes to 64 blocks with 5 repetitions
report = run_bench(BenchConfig(block_counts=(4, 16, 64), fractions=(0.0, 0.5), repetitions=3))
for row in report.select(operation="verify"):
    print(f"{row.scheme:9s} n={row.n_blocks:3d} f={row.fraction:.2f} "
          f"{row.mean_ns / 1e6:7.2f} ms  {row.artifact_size_bytes:6d} B")

export_report(report, "csv", "bench.csv")
export_report(report, "svg-plot", "bench.svg")
print("wrote bench.csv and bench.svg")

# issuer down 20% of the time, 50 ms each way
means = {"sss-delegation": [], "multisig": []}
for seed in range(20):
    latency = LatencyModel(50.0, downtime=periodic_downtime(0.2, 10_000, 250, random.Random(seed)))
    for protocol, rep in compare(latency, 50, seed).items():
        means[protocol].append(rep.mean_latency_ms)

for protocol, values in means.items():
    values = np.array(values)
    print(f"{protocol:15s} mean {values.mean():7.1f} ms  (min {values.min():.1f}, max {values.max():.1f})")
