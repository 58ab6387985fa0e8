"""Benchmark the Wigner grid kernel: numba jit path vs pure-numpy fallback.

The backend is frozen at import time from QRX_BACKEND, so each variant runs
in a subprocess with the environment variable set accordingly.

    python benchmarks/bench_wigner.py [--cutoff 60] [--grid 201] [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_once(cutoff: int, grid: int, repeats: int) -> None:
    import numpy as np

    from qrx import _kernels, fock

    rng = np.random.default_rng(11)
    g = rng.normal(size=(cutoff + 1, cutoff + 1)) + 1j * rng.normal(size=(cutoff + 1, cutoff + 1))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    axis = np.linspace(-6.0, 6.0, grid)
    qg, pg = np.meshgrid(axis, axis)
    q_flat, p_flat = qg.ravel(), pg.ravel()

    # warm-up (jit compilation for the numba path)
    _kernels.wigner_grid(rho, q_flat[:16], p_flat[:16])

    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        w = _kernels.wigner_grid(rho, q_flat, p_flat)
        best = min(best, time.perf_counter() - t0)

    dq = axis[1] - axis[0]
    norm = float(np.sum(w)) * dq * dq  # should be ~1 for a normalized state
    print(json.dumps({"backend": _kernels.BACKEND, "best_s": best, "norm": norm}))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoff", type=int, default=60)
    ap.add_argument("--grid", type=int, default=201)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        run_once(args.cutoff, args.grid, args.repeats)
        return

    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, QRX_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child",
             "--cutoff", str(args.cutoff), "--grid", str(args.grid),
             "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            print(f"{backend:>6}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        results[backend] = json.loads(proc.stdout)
        r = results[backend]
        print(f"{backend:>6}: {r['best_s'] * 1e3:9.1f} ms  (grid norm {r['norm']:.6f})")

    if "numpy" in results and "numba" in results:
        speedup = results["numpy"]["best_s"] / results["numba"]["best_s"]
        print(f"speedup: {speedup:.1f}x (numba over numpy)")


if __name__ == "__main__":
    main()
