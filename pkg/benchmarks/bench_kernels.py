"""Head to head timing of the cython and numpy gate kernels.

Both backends expose the same five kernels over batched statevectors,
so the benchmark imports them directly and runs identical workloads:
single gates in isolation, then a layered ansatz (ry/rz walls plus a
cnot ring) ending in expect_z.  Parity is asserted before timing.

Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --qubits 5 --batch 4096 --repeats 7
"""

from __future__ import annotations

import argparse
import sys
from time import perf_counter

import numpy as np

from qamm.qsim import _kernels_py

try:
    from qamm.qsim import _kernels_cy
except ImportError:
    _kernels_cy = None


def fresh_batch(rng: np.random.Generator, batch: int, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    state = rng.standard_normal((batch, dim)) + 1j * rng.standard_normal((batch, dim))
    state /= np.linalg.norm(state, axis=1, keepdims=True)
    return np.ascontiguousarray(state, dtype=np.complex128)


def ansatz(mod, state: np.ndarray, n_qubits: int, layers: int,
           angles: np.ndarray) -> np.ndarray:
    k = 0
    for _ in range(layers):
        for q in range(n_qubits):
            mod.apply_ry(state, q, angles[k])
            k += 1
        for q in range(n_qubits):
            mod.apply_rz(state, q, angles[k])
            k += 1
        for q in range(n_qubits):
            mod.apply_cnot(state, q, (q + 1) % n_qubits)
    return mod.expect_z(state, 0)


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = perf_counter()
        fn()
        times.append(perf_counter() - t0)
    return min(times)


def time_gate(mod, name: str, batch: int, n_qubits: int, repeats: int,
              rng: np.random.Generator) -> float:
    base = fresh_batch(rng, batch, n_qubits)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=batch)

    def run():
        state = base.copy()
        if name == "cnot":
            mod.apply_cnot(state, 0, n_qubits - 1)
        elif name == "expect_z":
            mod.expect_z(state, 0)
        else:
            getattr(mod, "apply_" + name)(state, 0, theta)

    return best_of(run, repeats)


def check_parity(batch: int, n_qubits: int, layers: int,
                 rng: np.random.Generator) -> float:
    base = fresh_batch(rng, batch, n_qubits)
    n_angles = 2 * n_qubits * layers
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(n_angles, batch))
    s_py, s_cy = base.copy(), base.copy()
    z_py = ansatz(_kernels_py, s_py, n_qubits, layers, angles)
    z_cy = ansatz(_kernels_cy, s_cy, n_qubits, layers, angles)
    gap = max(np.abs(s_py - s_cy).max(), np.abs(z_py - z_cy).max())
    if gap > 1e-10:
        raise SystemExit(f"backend mismatch: max abs gap {gap:.3e}")
    return gap


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=4)
    ap.add_argument("--batch", type=int, default=1024)
    ap.add_argument("--layers", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _kernels_cy is None:
        print("cython kernels not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    gap = check_parity(args.batch, args.qubits, args.layers, rng)
    print(f"parity: max abs gap {gap:.2e} over a {args.layers}-layer ansatz "
          f"({args.batch} x {1 << args.qubits} amplitudes)")
    print()

    header = f"{'workload':<12} {'numpy':>10} {'cython':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in ("rx", "ry", "rz", "cnot", "expect_z"):
        t_py = time_gate(_kernels_py, name, args.batch, args.qubits,
                         args.repeats, rng)
        t_cy = time_gate(_kernels_cy, name, args.batch, args.qubits,
                         args.repeats, rng)
        print(f"{name:<12} {t_py * 1e3:>8.3f}ms {t_cy * 1e3:>8.3f}ms "
              f"{t_py / t_cy:>7.2f}x")

    base = fresh_batch(rng, args.batch, args.qubits)
    n_angles = 2 * args.qubits * args.layers
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(n_angles, args.batch))
    t_py = best_of(lambda: ansatz(_kernels_py, base.copy(), args.qubits,
                                  args.layers, angles), args.repeats)
    t_cy = best_of(lambda: ansatz(_kernels_cy, base.copy(), args.qubits,
                                  args.layers, angles), args.repeats)
    print(f"{'ansatz':<12} {t_py * 1e3:>8.3f}ms {t_cy * 1e3:>8.3f}ms "
          f"{t_py / t_cy:>7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
