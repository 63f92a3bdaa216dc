#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times Hamiltonian assembly, the CSR matvec, and one Krylov step on a range
of sector sizes, checking on the way that both backends agree exactly on the
assembled matrices.

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from fermichain import _kernels
from fermichain.basis import product_basis
from fermichain.evolution import KrylovPropagator, PropagatorConfig
from fermichain.hamiltonian import HubbardParams, build_hamiltonian

CASES = [
    (8, 2, 2),    # dim 784
    (10, 2, 2),   # dim 2025
    (12, 2, 2),   # dim 4356
    (12, 3, 3),   # dim 48400
]


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(repeats: int):
    if "numba" not in _kernels.available_backends():
        raise SystemExit("numba backend unavailable; nothing to compare")

    rows = []
    rng = np.random.default_rng(0)
    for L, n_up, n_down in CASES:
        basis = product_basis(L, n_up, n_down)
        V = rng.uniform(-5, 5, size=L)
        params = HubbardParams(L=L, J=1.0, U=4.0, V=V)

        results = {}
        matrices = {}
        for backend in ("numba", "numpy"):
            _kernels.use_backend(backend)
            build_hamiltonian(params, basis)  # warm the path (JIT compile / caches)
            results[backend, "assemble"] = _best_of(
                lambda: build_hamiltonian(params, basis), repeats)
            matrices[backend] = build_hamiltonian(params, basis)

        same = all(
            np.array_equal(getattr(matrices["numba"], f), getattr(matrices["numpy"], f))
            for f in ("indptr", "indices", "data")
        )
        if not same:
            raise SystemExit(f"backend mismatch on L={L} ({n_up},{n_down})")

        H = matrices["numba"]
        x = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        for backend in ("numba", "numpy"):
            _kernels.use_backend(backend)
            H.matvec(x)
            results[backend, "matvec"] = _best_of(lambda: H.matvec(x), max(repeats, 5))
            prop = KrylovPropagator(H, PropagatorConfig())
            results[backend, "krylov step"] = _best_of(
                lambda: prop.advance(x / np.linalg.norm(x), 0.05), repeats)

        for op in ("assemble", "matvec", "krylov step"):
            tn, tp = results["numba", op], results["numpy", op]
            rows.append((f"L={L} ({n_up},{n_down}) dim={basis.dim}", op, tn, tp, tp / tn))

    print(f"{'case':<26} {'operation':<12} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for case, op, tn, tp, speedup in rows:
        print(f"{case:<26} {op:<12} {tn * 1e3:>12.3f} {tp * 1e3:>12.3f} {speedup:>8.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best is kept")
    args = parser.parse_args()
    previous = _kernels.active_backend()
    try:
        bench(args.repeats)
    finally:
        _kernels.use_backend(previous)


if __name__ == "__main__":
    main()
