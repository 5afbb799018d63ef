"""Benchmark the compiled kernels against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--frames 64] [--size 480x768] [--repeat 5]

Times ssim_sim and dynamic_scores over a synthetic video with both kernel
implementations and prints the per-call means and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from videval import _kernels_py, kernels, metrics
from videval.model import Frame, FrameSequence


def synthetic_video(n_frames: int, height: int, width: int, seed: int = 0) -> FrameSequence:
    rng = np.random.default_rng(seed)
    base = rng.random((height, width, 3))
    frames = []
    for _ in range(n_frames):
        base = np.clip(base + rng.normal(0, 0.01, base.shape), 0.0, 1.0)
        frames.append(Frame(base.copy()))
    return FrameSequence(frames, fps=8)


def time_call(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.mean(samples)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=64)
    parser.add_argument("--size", default="480x768", help="HEIGHTxWIDTH")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    height, width = (int(x) for x in args.size.split("x"))

    video = synthetic_video(args.frames, height, width)
    native = kernels._impl if kernels.BACKEND == "native" else None
    if native is None:
        print("compiled kernels unavailable; timing the numpy fallback only")

    rows = []
    for name, impl in [("native", native), ("python", _kernels_py)]:
        if impl is None:
            continue
        kernels._impl = impl
        rows.append((
            name,
            time_call(lambda: metrics.ssim_sim(video), args.repeat),
            time_call(lambda: metrics.dynamic_scores(video), args.repeat),
        ))
    kernels._impl = native if native is not None else _kernels_py

    print(f"\n{args.frames} frames @ {height}x{width}, mean of {args.repeat} runs")
    print(f"{'impl':<8}{'ssim_sim':>12}{'dynamic':>12}")
    for name, t_sim, t_dyn in rows:
        print(f"{name:<8}{t_sim * 1e3:>10.1f}ms{t_dyn * 1e3:>10.1f}ms")
    if len(rows) == 2:
        print(f"\nspeedup: ssim_sim x{rows[1][1] / rows[0][1]:.2f}, dynamic x{rows[1][2] / rows[0][2]:.2f}")


if __name__ == "__main__":
    main()
