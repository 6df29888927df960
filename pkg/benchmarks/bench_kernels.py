"""Time the compiled and numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--trajectories N] [--repeat R]

Both backends receive identical uniforms, so the script also reports the
largest difference between their outputs.
"""
import argparse
import time

import numpy as np
import scipy.linalg

from nosig.kernels import _pykernels

try:
    from nosig.kernels import _ckernels
except ImportError:
    _ckernels = None


def jump_inputs(n_traj, dim, t=1.0, dt=1e-3, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (a + a.conj().T)
    ops = np.array([np.sqrt(0.5) * np.diag(np.linspace(1, -1, dim))], dtype=complex)
    h_eff = h - 0.5j * ops[0].conj().T @ ops[0]
    props = np.stack([scipy.linalg.expm(-1j * h_eff * dt), scipy.linalg.expm(-1j * h_eff * 0.0)])
    n_full = int(round(t / dt))
    psi = np.ones(dim, dtype=complex) / np.sqrt(dim)
    uniforms = rng.random((n_traj, n_full, 2))
    return (psi, props, ops, dt, 0.0, n_full, uniforms)


def rk4_inputs(batch, dim, t=1.0, dt=1e-3, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (a + a.conj().T)
    ops = 0.3 * (rng.standard_normal((2, dim, dim)) + 1j * rng.standard_normal((2, dim, dim)))
    g = -1j * h - 0.5 * sum(L.conj().T @ L for L in ops)
    rhos = np.stack([np.eye(dim, dtype=complex) / dim] * batch)
    return (rhos, g, ops, dt, int(round(t / dt)), 0.0)


def best_of(fn, args, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args, 1)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cases = [
        (f"jump trajectories N={args.trajectories} d={args.dim} 1000 steps", "jump_trajectories",
         jump_inputs(args.trajectories, args.dim)),
        (f"rk4 lindblad batch={args.batch} d={args.dim} 1000 steps", "rk4_lindblad",
         rk4_inputs(args.batch, args.dim)),
    ]
    print(f"{'kernel':<48} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8} {'max diff':>10}")
    for label, name, inputs in cases:
        tp, op = best_of(getattr(_pykernels, name), inputs, args.repeat)
        if _ckernels is None:
            print(f"{label:<48} {tp:>11.4f} {'n/a':>11} {'n/a':>8} {'n/a':>10}")
            continue
        tc, oc = best_of(getattr(_ckernels, name), inputs, args.repeat)
        a = op[0] if isinstance(op, tuple) else op
        b = oc[0] if isinstance(oc, tuple) else oc
        diff = float(np.max(np.abs(a - b)))
        print(f"{label:<48} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
