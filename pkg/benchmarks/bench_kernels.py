"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on inputs sized like the real workload: HSD hierarchy-1
quantization of a 512-observation batch, LRD downsampling of 1024 stacked
observations, and hashing 1024 pixel-mapper codes.
"""

import argparse
import timeit

import numpy as np

from playstyle import _fallback, kernels

try:
    from playstyle import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    z = rng.normal(size=(512 * 20, 25)).astype(np.float32)
    cb = rng.normal(size=(2, 25)).astype(np.float32)
    z0 = rng.normal(size=(512 * 16, 16)).astype(np.float32)
    cb0 = rng.normal(size=(32, 16)).astype(np.float32)
    frames = rng.integers(0, 256, size=(4096, 32, 32)).astype(np.float64)
    codes = rng.integers(0, 256, size=(1024, 4096)).astype(np.uint8)
    return {
        "nearest_codes K=2 (10240x25)": lambda impl: kernels.nearest_codes(z, cb, impl),
        "nearest_codes K=32 (8192x16)": lambda impl: kernels.nearest_codes(z0, cb0, impl),
        "resize_bilinear 4096x32x32->8x8": lambda impl: kernels.resize_bilinear(frames, 8, 8, impl=impl),
        "fnv1a_rows 1024x4096": lambda impl: kernels.fnv1a_rows(codes, impl),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled kernels are not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, run in cases(rng).items():
        slow = best_of(lambda: run(_fallback), args.repeat) * 1e3
        if _kernels is None:
            print(f"{name:<34} {slow:10.2f} {'-':>10} {'-':>8}")
            continue
        fast = best_of(lambda: run(_kernels), args.repeat) * 1e3
        assert np.array_equal(run(_fallback), run(_kernels)), name
        print(f"{name:<34} {slow:10.2f} {fast:10.2f} {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
