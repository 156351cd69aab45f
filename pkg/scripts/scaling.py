"""Wall-clock scaling of the naive and fast IRD generators.

    python3 scripts/scaling.py
"""

import time

from irdgen import TypeDistribution, generate_ird, generate_ird_fast, make_chung_lu_kernel


def best_of(fn, k=3):
    best = float("inf")
    for _ in range(k):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    dist = TypeDistribution([1 / 3, 1 / 3, 1 / 3])
    kernel = make_chung_lu_kernel(dist)
    for name, sizes, gen in (
        ("fast", (10**5, 2 * 10**5, 4 * 10**5, 8 * 10**5), lambda n: generate_ird_fast(n, dist, kernel, 0.5, 1)),
        ("naive", (2000, 4000, 8000), lambda n: generate_ird(n, dist, kernel, 1)),
    ):
        prev = None
        for n in sizes:
            t = best_of(lambda: gen(n))
            ratio = f"{t / prev:.2f}" if prev else "-"
            print(f"{name:>5} n={n:>7} {t:8.4f}s  x{ratio}")
            prev = t


if __name__ == "__main__":
    main()
