"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported in one process; results are checked for equality
before timing.  The end-to-end row runs ``proclone check semantics`` once per
backend through the ``PROCLONE_NUMBA`` switch.
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from proclone import kernels


def cases(rng):
    q = 3
    head = rng.integers(0, q, q ** 4).astype(np.int64)
    args = rng.integers(0, q, (4, 3 ** 8)).astype(np.int64)
    heads = rng.integers(0, q, (512, q ** 2)).astype(np.int64)
    bargs = rng.integers(0, q, (2, 512, q ** 4)).astype(np.int64)
    nf, nd, nc = 256, 8, 256
    app_left = rng.integers(0, nc, (nf, nd)).astype(np.int64)
    app_right = rng.integers(0, nc, (nf, nd)).astype(np.int64)
    rel_dom = rng.random((nd, nd)) < 0.5
    rel_cod = rng.random((nc, nc)) < 0.9
    return {
        "endo_compose": (head, args, q),
        "endo_compose_batch": (heads, bargs, q),
        "arrow_relation": (app_left, app_right, rel_dom, rel_cod),
        "pair_related": (app_left[0], app_right[0], rel_dom, rel_cod),
    }


def end_to_end():
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, PROCLONE_NUMBA=flag)
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-m", "proclone", "check", "semantics"], env=env, capture_output=True,
                       check=True)
        out["numba" if flag == "1" else "numpy"] = time.perf_counter() - t0
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    if kernels.NUMBA_KERNELS is None:
        sys.exit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, inputs in cases(rng).items():
        f_np, f_nb = kernels.NUMPY_KERNELS[name], kernels.NUMBA_KERNELS[name]
        a, b = f_np(*inputs), f_nb(*inputs)  # also warms the jit
        assert np.array_equal(np.asarray(a), np.asarray(b)), name
        t_np = min(timeit.repeat(lambda: f_np(*inputs), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: f_nb(*inputs), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_np:>12.3f}{t_nb:>12.3f}{t_np / max(t_nb, 1e-9):>10.1f}x")
    if not args.skip_end_to_end:
        e2e = end_to_end()
        print(f"{'check semantics (s)':<22}{e2e['numpy']:>12.2f}{e2e['numba']:>12.2f}"
              f"{e2e['numpy'] / e2e['numba']:>10.1f}x")


if __name__ == "__main__":
    main()
