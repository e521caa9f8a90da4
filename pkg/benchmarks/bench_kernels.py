"""Compiled vs numpy kernels: per-call timings and one simulated second of the full network.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from dnfcurio import kernels
from dnfcurio.config import load_config
from dnfcurio.network import Network


def _cases(rng):
    f1 = rng.random(100)
    f2 = np.zeros((100, 100))
    f2[20:35, 40:60] = rng.random((15, 20))          # a localized peak, the common case
    dense = rng.random((100, 100))
    w = kernels.gaussian_taps(2.0, 10)
    u = rng.normal(size=10_000)
    drive = rng.normal(size=10_000)
    v = rng.random(10_000)
    return {
        "conv1d": lambda: kernels.conv1d(f1, w),
        "conv2d (sparse)": lambda: kernels.conv2d(f2, w, w, 1e-9),
        "conv2d (dense)": lambda: kernels.conv2d(dense, w, w),
        "relax 100x100": lambda: kernels.relax(u.copy(), drive, -1.0, 0.2),
        "trace_step 100x100": lambda: kernels.trace_step(v.copy(), dense.ravel(), 1.0, 10.0, 2000.0, 2000.0, True),
        "sigmoid 100x100": lambda: kernels.sigmoid(u, 100.0),
    }


def _network_second() -> float:
    cfg = load_config()
    net = Network.from_config(cfg["network"], seed=0)
    net.set_stimulus("color_stim", np.exp(-0.5 * ((np.arange(100) - 10) / 3.0) ** 2))
    net.set_stimulus("moving_cmd", 1.0)
    t0 = timeit.default_timer()
    for _ in range(100):
        net.step(10.0)
    return timeit.default_timer() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    backends = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    rng = np.random.default_rng(0)
    results: dict[str, dict[str, float]] = {}
    for name in backends:
        kernels.use_backend(name)
        for label, fn in _cases(rng).items():
            fn()
            t = min(timeit.repeat(fn, number=args.repeat, repeat=3)) / args.repeat
            results.setdefault(label, {})[name] = t * 1e6
        results.setdefault("network, 1 s simulated", {})[name] = _network_second() * 1e6
    print(f"{'case':28s}" + "".join(f"{b:>14s}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for label, row in results.items():
        line = f"{label:28s}" + "".join(f"{row[b]:12.1f}us" for b in backends)
        if len(backends) == 2:
            line += f"   {row['python'] / row['compiled']:6.2f}x"
        print(line)
    if len(backends) == 1:
        print("compiled core not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
