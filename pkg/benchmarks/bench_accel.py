"""Timing comparison between the compiled kernels and the pure-Python twins.

Usage::

    python3 benchmarks/bench_accel.py [--reps N]

Times the scalar calibration solver and the grid embedding kernel on both
backends and prints per-call latencies with the speedup ratio.  If the
compiled extension is unavailable the script reports pure-only numbers.
"""

import argparse
import time

import numpy as np

from semuq._accel import BACKEND, pure

try:
    from semuq._accel import _kernels
except ImportError:
    _kernels = None


def _time_per_call(fn, reps: int) -> float:
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_calibrate(reps: int) -> dict[str, float]:
    # moderate anchor weight so the solver takes a realistic iteration count
    args = (0.17765, 0.8047, 1.0, 0.05, 500, 1e-7, 1e-6, 1.0 - 1e-6)
    out = {"pure": _time_per_call(lambda: pure.calibrate_scalar(*args), reps)}
    if _kernels is not None:
        out["compiled"] = _time_per_call(lambda: _kernels.calibrate_scalar(*args), reps)
    return out

def bench_kme(reps: int) -> dict[str, float]:
    rng = np.random.default_rng(5)
    samples = rng.uniform(0.0, 1.0, 10)
    points = np.linspace(0.0, 1.0, 256)
    out = {"pure": _time_per_call(lambda: pure.kme_grid(samples, points, 0.05, True), reps)}
    if _kernels is not None:
        out["compiled"] = _time_per_call(
            lambda: _kernels.kme_grid(samples, points, 0.05, True), reps
        )
    return out


def _report(name: str, timings: dict[str, float]) -> None:
    print(f"{name}:")
    for backend, per_call in sorted(timings.items()):
        print(f"  {backend:>8}: {per_call * 1e6:9.2f} us/call")
    if "compiled" in timings:
        print(f"  {'speedup':>8}: {timings['pure'] / timings['compiled']:9.2f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=2000, help="calls per measurement")
    args = parser.parse_args()

    print(f"active backend: {BACKEND}")
    if _kernels is None:
        print("compiled extension not importable; timing the pure backend only")
    _report("calibrate_scalar (single probability)", bench_calibrate(args.reps))
    _report("kme_grid (10 samples onto 256 points)", bench_kme(args.reps))


if __name__ == "__main__":
    main()
