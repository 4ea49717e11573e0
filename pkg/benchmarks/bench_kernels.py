"""Timing sheet for the three hot kernels, JIT backend vs the numpy twin.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 7] [--batch 16]

Each case is called once per backend before timing so JIT compilation and
allocator warm-up stay out of the numbers; the reported figure is the
median of the repeat wall times.  The same arrays feed both backends, and
the result gap is printed next to the speedup as a parity spot check.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kinlat._backend import HAS_NUMBA
from kinlat.kernels import chain_force_flat, collision_rate, wave_nonlinear
from kinlat.lattice import LatticeSpec


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _cases(rng, batch: int):
    # shapes mirror what the pipelines actually push through the kernels:
    # a replica-stacked ensemble on a modest window, the d=1 refinement
    # ladder for the collision operator, and a long d=1 chain
    spec1 = LatticeSpec(1, 16)
    a1 = rng.normal(size=(200, 2) + spec1.shape) + 1j * rng.normal(
        size=(200, 2) + spec1.shape
    )
    yield (
        f"wave interaction d=1 N={spec1.N} batch=200",
        lambda backend: wave_nonlinear(a1, spec1, 0.3, backend=backend),
    )

    spec2 = LatticeSpec(2, 6)
    a2 = rng.normal(size=(batch, 2) + spec2.shape) + 1j * rng.normal(
        size=(batch, 2) + spec2.shape
    )
    yield (
        f"wave interaction d=2 N={spec2.N} batch={batch}",
        lambda backend: wave_nonlinear(a2, spec2, 0.3, backend=backend),
    )

    f1 = rng.uniform(0.1, 1.0, size=256)
    yield (
        "collision rate d=1 m=256",
        lambda backend: collision_rate(f1, 1, 256, 0.025, "gaussian", 1e-7, backend=backend),
    )

    f2 = rng.uniform(0.1, 1.0, size=(20, 20))
    yield (
        "collision rate d=2 m=20",
        lambda backend: collision_rate(f2, 2, 20, 0.2, "gaussian", 1e-7, backend=backend),
    )

    r = rng.normal(size=(batch, 512))
    yield (
        f"chain force direct n=512 batch={batch}",
        lambda backend: chain_force_flat(r, 1, 512, 0.4, method="direct", backend=backend),
    )


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not HAS_NUMBA:
        print("numba is not importable here; only the numpy path can run")
    rng = np.random.default_rng(args.seed)

    width = 44
    print(f"{'case':<{width}} {'numpy':>10} {'numba':>10} {'speedup':>8}  parity")
    for name, call in _cases(rng, args.batch):
        call("numpy")  # warm both paths before the clock starts
        t_np = _median_time(lambda: call("numpy"), args.repeats)
        if HAS_NUMBA:
            ref = call("numpy")
            call("numba")
            t_nb = _median_time(lambda: call("numba"), args.repeats)
            gap = float(
                np.max(np.abs(call("numba") - ref)) / max(1.0, np.max(np.abs(ref)))
            )
            print(
                f"{name:<{width}} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                f"{t_np / t_nb:>7.1f}x  {gap:.1e}"
            )
        else:
            print(f"{name:<{width}} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
