"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Each kernel is warmed up once (so numba compilation is excluded), then
timed with ``timeit``.  The end-to-end row runs a Bethe search in a fresh
interpreter per backend, selected with GAUDIN_LAB_NUMBA.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from gaudin_lab import kernels


def _cases(rng):
    dims = np.array([3, 4, 3, 4, 3], dtype=np.int64)
    frow = np.array([0, 1, 2, 1], dtype=np.int64)
    fcol = np.array([1, 2, 3, 0], dtype=np.int64)
    z = np.linspace(-1.0, 1.0, 8).astype(np.complex128)
    lam = np.ones(8)
    w = (rng.standard_normal(4) + 0.3j * rng.standard_normal(4)).astype(np.complex128)
    empty = np.zeros((0, 5), dtype=np.complex128)
    taylor = rng.standard_normal(12).astype(np.complex128)
    return {
        "embed_indices": (kernels.embed_indices_loop, kernels.embed_indices_np, (dims, 2, frow, fcol)),
        "bethe_system": (kernels.bethe_system_loop, kernels.bethe_system_np, (w, z, lam)),
        "newton": (kernels.newton_loop, kernels.newton_np, (w, z, lam, empty, 60, 1e-13, 1e6, False)),
        "frobenius": (kernels.frobenius_loop, kernels.frobenius_np, (2.0 + 0j, 0.75 + 0j, 0.3 + 0j, taylor, 12)),
    }


_E2E = ("import time; from gaudin_lab.gaudin import GaudinParams; from gaudin_lab.bethe import bethe_search;"
        "p = GaudinParams((0, 1, 3, 4, 7, 9), weights=(1,) * 6); bethe_search(p, 1, starts=5);"
        "t = time.perf_counter(); bethe_search(p, 3, starts=200, seed=1); print(time.perf_counter() - t)")


def _end_to_end(flag):
    env = dict(os.environ, GAUDIN_LAB_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []
    for name, (loop, vec, call_args) in _cases(rng).items():
        loop(*call_args)
        vec(*call_args)
        t_loop = min(timeit.repeat(lambda: loop(*call_args), number=args.number, repeat=args.repeat)) / args.number
        t_np = min(timeit.repeat(lambda: vec(*call_args), number=args.number, repeat=args.repeat)) / args.number
        rows.append({"kernel": name, "numba_us": t_loop * 1e6, "numpy_us": t_np * 1e6, "speedup": t_np / t_loop})
    if not args.skip_e2e:
        t1, t0 = _end_to_end("1"), _end_to_end("0")
        rows.append({"kernel": "bethe_search (end to end)", "numba_us": t1 * 1e6, "numpy_us": t0 * 1e6,
                     "speedup": t0 / t1})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'kernel':28s} {'numba [us]':>12s} {'numpy [us]':>12s} {'speedup':>8s}")
    for r in rows:
        print(f"{r['kernel']:28s} {r['numba_us']:12.2f} {r['numpy_us']:12.2f} {r['speedup']:8.2f}")


if __name__ == "__main__":
    main()
