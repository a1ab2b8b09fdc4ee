"""Compare the compiled tile kernels against the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]

Both backends produce bit-identical results (the test suite enforces
that); this only measures wall time, so the fallback's cost is visible
before anyone opts into it via STASIM_PURE_PYTHON=1.
"""

import argparse
import statistics
import time

from stasim import (
    ArrayConfig,
    SparsityProfile,
    generate,
    prune_to_dbb,
    simulate_gemm,
)
from stasim import _kernels

WORKLOADS = [
    (
        "SA 1x1x1 8x8 grid, 64x64x64 dense",
        ArrayConfig("SA", m=8, n=8, gating="lane"),
        (64, 64, 64),
        None,
    ),
    (
        "STA 2x2x2 2x2 grid, 64x64x64 dense",
        ArrayConfig("STA", a=2, b=2, c=2, m=2, n=2, gating="lane"),
        (64, 64, 64),
        None,
    ),
    (
        "STA 4x8x4 2x2 grid, 128x128x128 dense",
        ArrayConfig("STA", a=4, b=8, c=4, m=2, n=2),
        (128, 128, 128),
        None,
    ),
    (
        "STA_DBB 4x8x4 nnz4 2x2 grid, 128x128x128 pruned",
        ArrayConfig("STA_DBB", a=4, b=8, c=4, m=2, n=2, dbb_nnz=4, gating="lane"),
        (128, 128, 128),
        (8, 4),
    ),
]


def run_case(config, shapes, prune, repeats):
    mr, k, nc = shapes
    x = generate(mr, k, SparsityProfile.random(0.6, seed=11))
    w = generate(k, nc, SparsityProfile.random(0.5, seed=12))
    if prune:
        w = prune_to_dbb(w, *prune)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        simulate_gemm(config, x, w)
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the fallback only")

    width = max(len(name) for name, *_ in WORKLOADS)
    header = f"{'workload':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, config, shapes, prune in WORKLOADS:
        row = f"{name:<{width}}  "
        results = {}
        for backend in backends:
            _kernels.set_backend(backend)
            results[backend] = run_case(config, shapes, prune, args.repeats)
            row += f"{results[backend] * 1e3:>10.1f}ms"
        if "compiled" in results and "pure" in results:
            row += f"{results['pure'] / results['compiled']:>9.1f}x"
        print(row)
    _kernels.set_backend(_kernels.available_backends()[0])


if __name__ == "__main__":
    main()
