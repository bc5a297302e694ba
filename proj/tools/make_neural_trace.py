"""Write a synthetic extracellular trace (spikes over LFP and noise) as a
two-column CSV, time_s,volts, at 10 kS/s.

    python3 tools/make_neural_trace.py scenarios/data/neural_trace_10ks.csv
"""
import sys

import numpy as np

FS = 10_000.0
DURATION = 0.5


def spike(t):
    # biphasic unit, ~1 ms wide
    return -np.exp(-((t - 0.25e-3) / 0.12e-3) ** 2) + 0.45 * np.exp(-((t - 0.65e-3) / 0.25e-3) ** 2)


def main(path):
    rng = np.random.default_rng(7)
    t = np.arange(int(FS * DURATION)) / FS
    v = 0.4e-3 * np.sin(2 * np.pi * 7.0 * t) + 0.25e-3 * np.sin(2 * np.pi * 23.0 * t + 1.0)
    for unit, amp, rate in ((0, 3.0e-3, 40.0), (1, 1.8e-3, 25.0)):
        times = np.cumsum(rng.exponential(1.0 / rate, size=64))
        for ts in times[times < DURATION - 2e-3]:
            m = (t >= ts) & (t < ts + 1.5e-3)
            v[m] += amp * spike(t[m] - ts)
    v += 40e-6 * rng.standard_normal(t.size)
    with open(path, "w") as f:
        f.write("time_s,volts\n")
        for a, b in zip(t, v):
            f.write(f"{a:.6f},{b:.9e}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "neural_trace_10ks.csv")
