"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the CSR operator applications and the k-means inner steps on
generated graphs of a few sizes, then times one full eigensolve per
backend. Run as:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

import sparsecomm as sc
from sparsecomm import _kernels as K


def timeit(fn, *args, repeat=20):
    fn(*args)  # warm-up (includes JIT compilation for numba flavours)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_matvecs(n, c):
    cfg = sc.DcsbmConfig.two_class(n, c + 4, c - 4, sc.ThetaSpec.parse("uniform(3,7)^3"))
    graph, _ = sc.generate_dcsbm(cfg, seed=0)
    x = np.random.default_rng(0).standard_normal(n)
    deg = graph.degrees.astype(float)
    scale = 1.0 / np.sqrt(deg + 3.0)
    rows = [
        ("adjacency_matvec", (graph.row_offsets, graph.col_indices, x)),
        ("bethe_hessian_matvec", (graph.row_offsets, graph.col_indices, deg, 1.4, x)),
        ("sym_lap_matvec", (graph.row_offsets, graph.col_indices, scale, x)),
    ]
    print(f"\n== operator kernels, n={n}, |E|={graph.num_edges} ==")
    for name, args in rows:
        t_np = timeit(getattr(K, name + "_numpy"), *args)
        line = f"{name:24s} numpy {t_np * 1e6:9.1f} us"
        if K._HAVE_NUMBA:
            t_nb = timeit(getattr(K, name + "_numba"), *args)
            line += f"   numba {t_nb * 1e6:9.1f} us   speedup x{t_np / t_nb:.2f}"
        print(line)


def bench_kmeans(n, d, k):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((n, d))
    C = rng.standard_normal((k, d))
    labels, _ = K.kmeans_assign_numpy(X, C)
    rows = [
        ("kmeans_assign", (X, C)),
        ("kmeans_update", (X, labels, k)),
        ("min_sq_dist_update", (X, C[0], np.full(n, np.inf))),
    ]
    print(f"\n== k-means kernels, n={n}, d={d}, k={k} ==")
    for name, args in rows:
        t_np = timeit(getattr(K, name + "_numpy"), *args)
        line = f"{name:24s} numpy {t_np * 1e6:9.1f} us"
        if K._HAVE_NUMBA:
            t_nb = timeit(getattr(K, name + "_numba"), *args)
            line += f"   numba {t_nb * 1e6:9.1f} us   speedup x{t_np / t_nb:.2f}"
        print(line)


def bench_solve(n):
    cfg = sc.DcsbmConfig.two_class(n, 14, 6, sc.ThetaSpec.parse("uniform(3,7)^3"))
    graph, _ = sc.generate_dcsbm(cfg, seed=0)
    print(f"\n== end-to-end eigensolve (4 smallest of H_1.4), n={n}, backend={K.BACKEND} ==")
    t0 = time.perf_counter()
    pairs = sc.bethe_hessian_smallest(graph, 1.4, 4, tol=1e-8)
    print(f"solve: {time.perf_counter() - t0:.3f} s, converged={pairs.converged.all()}")


if __name__ == "__main__":
    print(f"active backend: {K.BACKEND}  (set SPARSECOMM_NUMBA=0 to force numpy)")
    for n in (2000, 20000):
        bench_matvecs(n, 10)
    bench_kmeans(20000, 2, 3)
    bench_solve(20000)
