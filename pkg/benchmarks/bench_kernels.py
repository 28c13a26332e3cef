"""Benchmark the compiled kernels against the numpy reference.

Times each kernel on representative workloads, prints a speedup table, and
cross-checks that both backends return byte-identical results on every
workload first. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from swm import _kernels_py as kpy

try:
    from swm import _kernels as kc
except ImportError:
    kc = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raster(mod, img, rng):
    def work():
        mod.fill_rect(img, 0.1, 0.1, 0.9, 0.9, 90, 90, 90)
        mod.fill_circle(img, 0.5, 0.5, 0.2, 200, 60, 60)
        mod.fill_convex_poly(img, VERTS, 60, 60, 200)
    return work


ANG = np.sort(np.random.default_rng(0).uniform(0, 2 * np.pi, size=6))
VERTS = np.ascontiguousarray(
    np.stack([0.5 + 0.3 * np.cos(ANG), 0.5 + 0.3 * np.sin(ANG)], axis=1))


def bench_rollout(mod, k, t):
    rng = np.random.default_rng(1)
    p0 = np.array([0.2, 0.2], dtype=np.float32)
    actions = rng.uniform(-0.1, 0.1, size=(k, t, 2)).astype(np.float32)
    rects = np.array([[0.48, 0.0, 0.52, 0.42], [0.48, 0.58, 0.52, 1.0]],
                     dtype=np.float32)
    out = np.empty((k, t, 2), dtype=np.float32)

    def work():
        mod.tworoom_rollout(p0, actions, np.float32(0.1), np.float32(0.03),
                            np.float32(0.055), np.float32(0.945), rects, out)
    return work, out


def verify_equal():
    rng = np.random.default_rng(2)
    img_c = rng.integers(0, 256, size=(224, 224, 3), dtype=np.uint8)
    img_p = img_c.copy()
    bench_raster(kc, img_c, rng)()
    bench_raster(kpy, img_p, rng)()
    assert img_c.tobytes() == img_p.tobytes(), "raster backends diverge"

    wc, out_c = bench_rollout(kc, 300, 10)
    wp, out_p = bench_rollout(kpy, 300, 10)
    wc()
    wp()
    assert out_c.tobytes() == out_p.tobytes(), "rollout backends diverge"
    print("backends agree byte-for-byte on all benchmark workloads\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()

    if kc is None:
        print("compiled extension not built; nothing to compare")
        return

    verify_equal()

    rows = []
    img = np.zeros((224, 224, 3), dtype=np.uint8)
    rng = np.random.default_rng(3)
    t_c = timeit(bench_raster(kc, img, rng), args.repeats)
    t_p = timeit(bench_raster(kpy, img, rng), args.repeats)
    rows.append(("raster 224x224 (rect+circle+poly)", t_c, t_p))

    for k, t in ((300, 10), (1000, 30)):
        wc, _ = bench_rollout(kc, k, t)
        wp, _ = bench_rollout(kpy, k, t)
        t_c = timeit(wc, args.repeats)
        t_p = timeit(wp, args.repeats)
        rows.append((f"rollout K={k} T={t}", t_c, t_p))

    print(f"{'workload':40s} {'compiled':>12s} {'python':>12s} {'speedup':>9s}")
    for name, t_c, t_p in rows:
        print(f"{name:40s} {t_c * 1e3:10.3f}ms {t_p * 1e3:10.3f}ms {t_p / t_c:8.1f}x")


if __name__ == "__main__":
    main()
