#!/usr/bin/python3
"""
Wall-clock scaling of spectral against direct circular convolution with a kernel as
large as the input, the regime where the FFT path pays off.
"""
import matplotlib.pyplot as plt
from frnet.measure import bench_scaling

sizes = [8, 16, 32, 64, 128, 256]
report = bench_scaling("spectral_conv", sizes, "full", repeats=5)
report.rows += bench_scaling("direct_conv", sizes[:-1], "full", repeats=5).rows
print(report.to_csv())
print("hardware:", report.hardware)
print("spectral faster than direct from N =", report.crossover())
for op in ("spectral_conv", "direct_conv"):
    print(op, "time ratios at doubled N:", [f"{n}: {r:.2f}" for n, r in report.ratios(op)])

fig, ax = plt.subplots(figsize=(6, 4))
report.plot(ax)
fig.tight_layout()
fig.savefig("scaling.svg")
plt.show()
